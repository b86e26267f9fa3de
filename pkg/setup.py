import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-python fallback kernels are selected at import time when the
    # extension is absent, so a cython-less build is still functional.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "qconcur._kernels",
                ["src/qconcur/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
