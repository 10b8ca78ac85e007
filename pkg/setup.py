import numpy
from setuptools import Extension, setup

# The compiled core is optional: without Cython (or a C compiler) the package
# falls back to the NumPy implementations selected in tvcap.backend.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tvcap._core",
                ["src/tvcap/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
