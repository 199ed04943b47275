"""Build script: compiles the hot-loop extension dekernel._core.

The package still works without the extension (a numpy fallback is
selected at import time), so a failed compile only costs speed.
"""

from setuptools import Extension, setup
from Cython.Build import cythonize

core = Extension(
    "dekernel._core",
    ["src/dekernel/_core.pyx"],
    extra_compile_args=["-O2"],
)

setup(
    ext_modules=cythonize(
        [core],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
)
