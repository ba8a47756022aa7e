"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (pure-Python kernels are selected
at import time), so a missing compiler or Cython is not fatal.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "lhsphere._bessel_cy",
                ["src/lhsphere/_bessel_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
