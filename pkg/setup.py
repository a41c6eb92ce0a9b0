"""Build script for the optional compiled solver kernel.

The package works without the extension (it falls back to the pure-Python
kernel at import time), so any build failure here is non-fatal for users:
set COALNET_SKIP_EXT=1 to install without attempting the build.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("COALNET_SKIP_EXT") != "1":
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "coalnet._kernels._fast",
                ["src/coalnet/_kernels/_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
