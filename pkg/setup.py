"""Build hook for the optional compiled matching kernel.

The package is pure Python; the Cython extension only accelerates the
morphism search inner loop. If Cython or a C compiler is unavailable the
build falls back to the interpreted kernel with identical behaviour.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "sygra._match_cy",
                sources=["src/sygra/_match_cy.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
