from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # numpy fallback kernels are used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "qskyrmion._ckernels",
                ["src/qskyrmion/_ckernels.pyx"],
                extra_compile_args=["-O3", "-march=native", "-fcx-limited-range"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
