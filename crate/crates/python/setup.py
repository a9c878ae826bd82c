"""Builds the Rust extension with cargo and packages it as omtomo_py.

Neither maturin nor setuptools-rust is assumed; a custom build_ext shells
out to cargo and copies the cdylib to the location setuptools expects.
"""

import shutil
import subprocess
import sys
import sysconfig
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

CRATE_DIR = Path(__file__).resolve().parent
WORKSPACE_DIR = CRATE_DIR.parent.parent


class CargoBuildExt(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            ["cargo", "build", "--release", "-p", "omtomo-py"],
            cwd=WORKSPACE_DIR,
            check=True,
        )
        lib_name = {
            "win32": "omtomo_py.dll",
            "darwin": "libomtomo_py.dylib",
        }.get(sys.platform, "libomtomo_py.so")
        built = WORKSPACE_DIR / "target" / "release" / lib_name
        if not built.exists():
            raise FileNotFoundError(f"cargo did not produce {built}")
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    ext_modules=[Extension("omtomo_py", sources=[])],
    cmdclass={"build_ext": CargoBuildExt},
)
