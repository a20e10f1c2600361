import os

from setuptools import setup

ext_modules = []
if os.environ.get("POWERMIX_PURE", "") not in ("1", "true", "yes"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            Extension(
                "powermix._ckernels",
                ["src/powermix/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            ),
            language_level=3,
        )
    except ImportError:
        # no Cython or numpy at build time; the numpy fallback is used
        ext_modules = []

setup(ext_modules=ext_modules)
