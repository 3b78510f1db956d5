"""Build script for the compiled path-simulation kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), but the compiled kernel is what makes large Monte Carlo runs
practical.
"""

import os

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# the sampler functions cimported from numpy.random live in a static lib
# shipped inside the numpy install
_npyrandom_dir = os.path.join(os.path.dirname(numpy.random.__file__), "lib")

extensions = [
    Extension(
        "cbilim._kernels._paths_cy",
        ["src/cbilim/_kernels/_paths_cy.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[_npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
