import os

import numpy as np
from setuptools import Extension, setup

# no FMA contraction and no sin/cos -> sincos fusion: kernels must round
# like the scalar path, and glibc's sincos can differ from sin and cos
STRICT_FP = ["-O3", "-ffp-contract=off", "-fno-builtin-sin", "-fno-builtin-cos"]

ext_modules = []
if os.environ.get("PLANKIT_NO_EXTENSION", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "plankit.validity._kernels",
                    ["src/plankit/validity/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=STRICT_FP,
                ),
                Extension(
                    "plankit.spaces._steering",
                    ["src/plankit/spaces/_steering.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=STRICT_FP,
                ),
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
