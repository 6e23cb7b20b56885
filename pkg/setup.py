"""Build script: compiles the optional permutation kernel extension.

The package works without the extension (a vectorized numpy fallback is
selected at import time), so any compiler or Cython failure downgrades the
build to pure Python instead of aborting it.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class optional_build_ext(build_ext):
    """build_ext that warns instead of failing when compilation breaks."""

    def run(self):
        try:
            super().run()
        except (PlatformError, FileNotFoundError) as exc:
            warnings.warn(f"extension build skipped: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except (CCompilerError, ExecError, PlatformError, ValueError) as exc:
            warnings.warn(f"building {ext.name} failed, using pure-Python kernels: {exc}")


if cythonize is not None:
    ext_modules = cythonize(
        ["src/spearperm/_ckernels.pyx"],
        compiler_directives={"language_level": "3"},
    )
else:
    warnings.warn("Cython unavailable, building without compiled kernels")
    ext_modules = []

setup(
    ext_modules=ext_modules,
    cmdclass={"build_ext": optional_build_ext},
)
