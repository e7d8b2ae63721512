"""Design, diagonalize and analyze multimode parametric-interaction kernels."""

from .numerics import Axis, InvalidArgument, default_axis, make_uniform_axis
from .kernellab import KernelMatrix, ModulatedKernelSpec, SpatialCrystal, TemporalCrystal, build_modulated
from .supermodes import SupermodeSet, predict_modulated_spectrum, solve_fredholm

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "InvalidArgument",
    "KernelMatrix",
    "ModulatedKernelSpec",
    "SpatialCrystal",
    "SupermodeSet",
    "TemporalCrystal",
    "build_modulated",
    "default_axis",
    "make_uniform_axis",
    "predict_modulated_spectrum",
    "solve_fredholm",
]
