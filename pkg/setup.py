from setuptools import setup

# The compiled kernels are an optional speedup; the package falls back to
# pure-Python implementations when the extension is absent.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/order_bench/kernels/_ckernels.pyx"],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
