"""Builds the optional compiled kernels; the package falls back to numpy without them."""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or Cython missing
            self.warn(f"compiled kernels not built ({exc}); using the numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self.warn(f"building {ext.name} failed ({exc}); using the numpy fallback")


def extensions():
    if os.environ.get("HARMONIC_KIT_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "harmonic_kit._ckernels",
        ["src/harmonic_kit/_ckernels.pyx"],
        # no fast-math / FMA contraction: results must match the numpy fallback bit for bit
        extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
