"""Build the optional compiled kernels.

The package works without them: ``billiardlab.kernels`` falls back to the
numpy implementation when the extension is missing.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("BILLIARDLAB_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "billiardlab._kernels",
                    ["src/billiardlab/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
