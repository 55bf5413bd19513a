"""Build script: compiles the optional accelerator kernels when Cython and a
C toolchain are available, otherwise installs pure-Python only.

The package selects the backend at import time; results are bit-identical
either way, only speed differs.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "pcrsim._kernels._cy",
                ["src/pcrsim/_kernels/_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
