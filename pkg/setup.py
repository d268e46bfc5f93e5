"""Build script for the compiled kernel extension.

The package works without the extension: if Cython (or a C compiler) is
unavailable the install simply skips it and `rkadapt.kernels` falls back to
the pure-Python lane at import time.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "rkadapt.kernels._compiled",
                ["src/rkadapt/kernels/_compiled.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
