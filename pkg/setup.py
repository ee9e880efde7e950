"""Build script for the compiled simulation kernel.

The extension is optional at runtime: if it is absent (no compiler, or a
source checkout without a build step) the package falls back to the pure
Python stepper selected in ``plastevo.backend``.

-ffp-contract=off keeps the kernel's float arithmetic bit-identical to the
pure Python twin (no fused multiply-adds).
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "plastevo._espcore",
    ["src/plastevo/_espcore.pyx"],
    include_dirs=[numpy.get_include()],
    extra_compile_args=["-O3", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level="3"))
