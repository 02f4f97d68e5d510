import os

from setuptools import Extension, setup

# UNOTSIM_SKIP_EXT=1 installs the pure-NumPy build (the compiled kernels are
# selected at import time only when present, so nothing else changes).
if os.environ.get("UNOTSIM_SKIP_EXT", "0") == "1":
    ext_modules = []
else:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "unotsim._kernels._core",
                sources=["src/unotsim/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
