from setuptools import Extension, setup

# The compiled state-sum kernel is optional: the package falls back to the
# pure-Python kernel in twistlink._statesum_py when the extension is absent.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("twistlink._statesum", ["src/twistlink/_statesum.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
