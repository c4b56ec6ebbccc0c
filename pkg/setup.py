"""Build script for the optional compiled loss kernel.

The package installs and runs fine without the extension; `crisp.ordreg`
falls back to the NumPy kernel when the compiled module is absent.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "crisp.ordreg._itloss_c",
        ["src/crisp/ordreg/_itloss_c.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
