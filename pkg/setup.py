import os

from setuptools import setup

ext_modules = []
_flags = ["-O3"]
if os.environ.get("SCHRODRIFT_NATIVE", "") not in ("", "0"):
    # tune for the build machine; not portable across CPUs
    _flags.append("-march=native")
if os.environ.get("SCHRODRIFT_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        # no Cython at build time: the pure-Python kernels are used instead
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "schrodrift.propagator._kernels",
                    ["src/schrodrift/propagator/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=_flags,
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
