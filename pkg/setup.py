"""Build the optional Cython kernels.

The package works without them: ``kelvinwaves.kernels`` falls back to the
pure-Python implementation when the extension is missing.
"""
import os

import numpy as np
from setuptools import setup

ext_modules = []
if os.environ.get("KELVINWAVES_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "kelvinwaves._kernels",
                    ["src/kelvinwaves/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
