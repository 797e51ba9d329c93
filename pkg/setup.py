import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "ubk._core_cy",
                ["src/ubk/_core_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Pure-python install still works; ubk.core falls back to the numpy
    # implementation when the extension is absent.
    extensions = []

setup(ext_modules=extensions)
