"""Build script: compiles the optional grid-sweep kernel when a toolchain is present.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any build failure downgrades to a pure-Python
install instead of aborting.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Swallow compiler failures; the numpy backend covers the same API."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain, ...
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            f"compiled kernels unavailable ({exc!r}); "
            "falling back to the pure-numpy backend"
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "medbounds._kernels._grid",
        ["src/medbounds/_kernels/_grid.pyx"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
