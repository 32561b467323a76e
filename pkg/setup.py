"""Build script: compiles the optional Cython kernel extension.

If the extension cannot be built the package still installs; the pure
numpy kernels are used instead (see rsmrecon.kernels).
"""
import numpy as np
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rsmrecon._kernels",
                ["src/rsmrecon/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
