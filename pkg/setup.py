import os

from setuptools import Extension, setup

# The compiled kernels are an optional fast path; the package falls back to
# the NumPy implementation when the extension is absent.
ext_modules = []
if os.environ.get("PAIRSCALE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "pairscale._kernels._native",
                    sources=["src/pairscale/_kernels/_native.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
