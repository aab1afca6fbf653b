import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "vibrosim._ckernels",
        ["src/vibrosim/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        # no FMA contraction: keeps the FDM loop bit-identical to the numpy fallback
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
