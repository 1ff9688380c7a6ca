"""Build script: compiles the hot-loop kernels when a C toolchain is present.

The compiled extension is optional.  If Cython or the compiler is missing the
package installs anyway and falls back to the pure NumPy kernels at import
time (see fraglog._backend).
"""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "fraglog._kernels",
        ["src/fraglog/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize(
        [ext],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover
    print(f"fraglog: skipping compiled kernels ({exc!r}); "
          "pure-python fallback will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
