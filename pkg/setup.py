"""Build script for the optional compiled kernels.

The package is fully functional without the extension: `branched_transport.kernels`
falls back to the NumPy implementations when `_kernels` is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "branched_transport._kernels",
                ["src/branched_transport/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
