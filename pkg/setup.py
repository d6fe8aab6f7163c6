"""Build script for the optional compiled scoring kernel.

The package is fully functional without the extension: relayer._kernel
falls back to the pure-Python implementation when the compiled module is
missing. Build failures are therefore non-fatal.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: compiled kernel skipped ({exc}); "
                  "using pure-Python fallback", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "using pure-Python fallback", file=sys.stderr)


extensions = [
    Extension("relayer._kernel._speedups",
              ["src/relayer/_kernel/_speedups.pyx"]),
]

try:
    from Cython.Build import cythonize
    extensions = cythonize(
        extensions,
        compiler_directives={"language_level": "3", "boundscheck": False,
                             "wraparound": False, "cdivision": True},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
