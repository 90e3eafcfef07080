import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; superband.kernels falls back to numpy
    cythonize = None

openmp = [] if os.environ.get("SUPERBAND_NO_OPENMP") else ["-fopenmp"]

ext_modules = []
if cythonize is not None and not os.environ.get("SUPERBAND_PURE_INSTALL"):
    ext_modules = cythonize(
        [
            Extension(
                "superband._kernels",
                ["src/superband/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"] + openmp,
                extra_link_args=openmp,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
