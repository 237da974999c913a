import os

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("PLRECON_BUILD_JOBS", default=0).install()

sources = [
    "src/grid.cpp",
    "src/coefficients.cpp",
    "src/forward.cpp",
    "src/dn_map.cpp",
    "src/functionals.cpp",
    "src/probes.cpp",
    "src/reconstruct.cpp",
    "src/config.cpp",
    "src/pipelines.cpp",
    "src/bindings.cpp",
]

ext = Pybind11Extension(
    "plrecon._core",
    sources,
    include_dirs=[
        "include",
        "vendor",
        os.environ.get("EIGEN3_INCLUDE_DIR", "/usr/include/eigen3"),
    ],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
