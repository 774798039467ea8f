"""Build script: compiles the optional Cython kernel for the tridiagonal
eigenvalue bisection.  If Cython or a C compiler is unavailable (or
CMC_BIFURCATE_PURE=1 is set) the package installs pure-Python only and the
numpy fallback backend is selected at import time."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("CMC_BIFURCATE_PURE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "cmc_bifurcate._kernels._sturm",
                    ["src/cmc_bifurcate/_kernels/_sturm.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
