"""Builds the optional compiled kernel.

The package is fully functional without the extension; sqcached.kernel
falls back to the pure-Python implementation when the build is skipped
or fails (e.g. no C compiler on the install host).
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and os.path.exists("src/sqcached/_ckernel.pyx"):
    ext_modules = cythonize(
        [
            Extension(
                "sqcached._ckernel",
                ["src/sqcached/_ckernel.pyx"],
                extra_compile_args=["-O2"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
