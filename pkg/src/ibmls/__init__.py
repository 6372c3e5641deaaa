"""Immersed-boundary incompressible flow solver with one-sided
moving-least-squares coupling kernels."""

from .errors import (
    ConfigurationError,
    IBMLSError,
    NearSingularGram,
    SolverError,
)
from .kernels import KernelKind, eval1d, eval_tensor, half_support
from .mls import GeneratingWeights, ShiftMode, Stencil, generating_weights

__all__ = [
    "ConfigurationError",
    "IBMLSError",
    "NearSingularGram",
    "SolverError",
    "KernelKind",
    "eval1d",
    "eval_tensor",
    "half_support",
    "KernelKind",
    "GeneratingWeights",
    "ShiftMode",
    "Stencil",
    "generating_weights",
]

__version__ = "0.1.0"
