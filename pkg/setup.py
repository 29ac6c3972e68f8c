import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CONDENT_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "condent._kernels._core",
            sources=["src/condent/_kernels/_core.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level=3)
    except ImportError:
        # No Cython available: install pure-Python; the numpy fallback
        # backend is selected automatically at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
