"""Builds the optional compiled kernels; the package falls back to pure Python without them."""
from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension
    import numpy as np
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "radarbandits._ckernels",
                ["src/radarbandits/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
