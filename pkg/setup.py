"""Build hook for the optional compiled kernel.

The package works without it; the pure-Python twin is selected at
import time when the extension is absent.  Set SURFSEP_PURE=1 to skip
the extension build entirely.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SURFSEP_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("surfsep._core", ["src/surfsep/_core.pyx"])],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
