"""Build hook for the optional compiled BGP join kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so the extension is marked optional: a missing compiler
must not break installation.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "virtrep._bgpc",
                ["src/virtrep/_bgpc.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
