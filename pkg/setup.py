from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled core is optional at runtime (a numpy fallback is selected at
# import when the extension is missing) but is built by default.
setup(
    ext_modules=cythonize(
        [
            Extension(
                "primeomega._fastcore",
                sources=["src/primeomega/_fastcore.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
)
