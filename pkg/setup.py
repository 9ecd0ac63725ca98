import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PHYSREC_SKIP_NATIVE"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "physrec.kernels._native",
                    ["src/physrec/kernels/_native.pyx"],
                    include_dirs=[np.get_include()],
                    # -O2 on purpose: -ffast-math would break the bitwise
                    # parity the pure backend is held to.
                    extra_compile_args=["-O2"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
