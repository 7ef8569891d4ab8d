"""Build the optional compiled interval kernel.

The package works without it: ``deltasat.tape`` falls back to the pure
Python kernel when ``deltasat._ckernels`` cannot be imported.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("DELTASAT_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "deltasat._ckernels",
                    ["src/deltasat/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no -ffast-math: the kernel relies on IEEE semantics
                    extra_compile_args=["-O2", "-fno-fast-math", "-ffp-contract=off"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
