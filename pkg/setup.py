import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        [Extension("paneitzlab._kernels_c", ["src/paneitzlab/_kernels_c.pyx"],
                   include_dirs=[np.get_include()])],
        language_level=3,
    ),
)
