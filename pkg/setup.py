"""Build script for the optional compiled solver core.

The package is fully functional without the extension; if Cython or a C
compiler is unavailable the build degrades to the pure-numpy solver.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "greysvr._solver._speedups",
                ["src/greysvr/_solver/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # The compiled solver must reproduce numpy's non-fused float
                # arithmetic bit for bit; keep FMA contraction off.
                extra_compile_args=["-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
