"""Build script: compiles the optional Cython kernel core.

The package is fully functional without the extension (the numpy fallback in
quditbh._kernels_py is selected at import time), so a missing compiler must
not break installation.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "quditbh._core",
                ["src/quditbh/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # noqa: BLE001 - any build-chain gap means "skip the ext"
    print(f"quditbh: building without compiled core ({exc})", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
