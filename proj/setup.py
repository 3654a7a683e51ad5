from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "prescurv._prescurv",
    sorted(glob("src/*.cpp")) + ["python/bindings.cpp"],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
    packages=["prescurv"],
    package_dir={"prescurv": "python/prescurv"},
)
