"""Builds the optional compiled kernels.

The package is fully functional without the extension: ``panav.kernels``
falls back to the pure-Python implementations when the compiled module is
missing, so a failed native build only costs speed.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    """Attempt the native build, warn and continue on failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        import warnings

        warnings.warn(f"native kernel build skipped: {exc}")


def _extensions():
    if os.environ.get("PANAV_SKIP_NATIVE"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    # -ffp-contract=off: the compiled lane must match the Python lane bit
    # for bit, so fused multiply-adds are off the table
    ext = Extension(
        "panav._native",
        sources=["src/panav/_native.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=_extensions(), cmdclass={"build_ext": _OptionalBuildExt})
