"""Splittable counter-based random streams.

A stream is addressed by (seed, key-tuple) and realised as a Philox bit
generator seeded through SeedSequence, so any (seed, index...) address
reproduces the same draws on any machine, regardless of how many sibling
streams exist or in what order they are consumed.  Bulk samplers split work
into fixed-size blocks, one child stream per block, which makes results
independent of the parallelism degree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BLOCK_PATHS = 1024      # paths per stream block in bulk subordinator samplers
DISK_BLOCK_PATHS = 32   # paths per stream block in the disk walkers


@dataclass(frozen=True)
class RngStream:
    seed: int
    key: tuple = ()

    def child(self, *idx: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(idx))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)

    def bit_generator(self) -> np.random.Philox:
        return np.random.Philox(seed=self.seed_sequence())

    def generator(self) -> np.random.Generator:
        return np.random.Generator(self.bit_generator())
