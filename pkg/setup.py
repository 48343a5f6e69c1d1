"""Build script: compiles the optional Cython hot kernel for the Schmidt
Langevin integrator.  The package works without it (a pure-numpy fallback is
selected at import time), so any build failure here is non-fatal."""

import sys

import numpy
from setuptools import Extension, setup


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    try:
        return cythonize(
            [
                Extension(
                    "entflow.dynamics._kernel",
                    ["src/entflow/dynamics/_kernel.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except Exception as exc:  # pragma: no cover
        print(f"cython build skipped: {exc}", file=sys.stderr)
        return []


setup(ext_modules=extensions())
