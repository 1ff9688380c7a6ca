"""Backend selection: compiled kernels when the extension built, else the
pure NumPy fallback.  Set FRAGLOG_FORCE_PURE=1 to force the fallback (used by
the benchmark and the cross-backend tests).
"""

import os

from . import _purekernels

if os.environ.get("FRAGLOG_FORCE_PURE"):
    _impl = _purekernels
    HAVE_COMPILED = False
else:
    try:
        from . import _kernels as _impl
        HAVE_COMPILED = True
    except ImportError:
        _impl = _purekernels
        HAVE_COMPILED = False

BACKEND = _impl.BACKEND

finite_jump_block = _impl.finite_jump_block
stable_block = _impl.stable_block
disk_block = _impl.disk_block
disk_escape_block = _impl.disk_escape_block


def pure():
    """The pure module, always available (reference semantics)."""
    return _purekernels


def compiled():
    """The compiled module or None."""
    try:
        from . import _kernels
        return _kernels
    except ImportError:
        return None
