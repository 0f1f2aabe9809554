import os

import numpy as np
from setuptools import setup

# The compiled kernel extension is optional: when Cython or a C compiler is
# unavailable the package falls back to the pure-numpy kernels at import time.
PYX = os.path.join("src", "dplac", "kernels", "_core.pyx")
try:
    from Cython.Build import cythonize

    ext_modules = cythonize([PYX], language_level="3") if os.path.exists(PYX) else []
except ImportError:
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
