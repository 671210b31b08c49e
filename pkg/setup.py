"""Build script: compiles the traversal kernels when Cython is available.

The package works without the extension (a pure-Python twin is selected at
import time), so any compilation failure downgrades to a warning instead of
aborting the install.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/rastvec/_kernels_cy.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    print(f"rastvec: skipping compiled kernels ({exc}); "
          "falling back to pure-Python backend", file=sys.stderr)

setup(ext_modules=ext_modules)
