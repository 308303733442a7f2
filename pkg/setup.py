from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "opineq._jacobi_cy",
                ["src/opineq/_jacobi_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython available: install the pure-Python fallback only.
    extensions = []

setup(ext_modules=extensions)
