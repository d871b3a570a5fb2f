"""Build the optional Cython kernels; the package still installs without them."""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("FRAGSIM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "fragsim._kernels",
                    ["src/fragsim/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
