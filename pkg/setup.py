import os

from setuptools import Extension, setup


def _extensions():
    """Compiled kernel extension; the package falls back to the pure
    numpy kernels when it cannot be built."""
    if os.environ.get("SPARSEIQC_SKIP_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "sparseiqc.numerics._ckernels",
        ["src/sparseiqc/numerics/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    ext.optional = True
    return cythonize(
        [ext],
        language_level="3",
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=_extensions())
