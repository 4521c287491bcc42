"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure-Python
implementation of the same kernels is selected at import time); set
SPHERMOMENTS_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SPHERMOMENTS_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/sphermoments/_kernels.pyx"],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
