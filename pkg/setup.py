"""Build script for the optional compiled Gaussian fill kernel.

The package is pure Python plus one optional Cython extension
(lrtransfer._gaussfill).  If Cython or a C compiler is missing the
build falls back to the numpy implementation in _gaussfill_py; the
installed package selects the backend at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "lrtransfer._gaussfill",
        sources=["src/lrtransfer/_gaussfill.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
