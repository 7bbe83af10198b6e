"""Extremal-point statistics of two-dimensional Gaussian random fields.

Signed densities of maxima, minima and saddles next to a Dirichlet wall,
bulk charge-charge correlations and the curvature functionals built from
them, with Monte Carlo and finite-difference cross-checks.
"""

from . import actions, embedding, kernels, mcfield, numerics, specfun, twopoint, wallprofile
from .errors import (
    ConditioningError,
    ConvergenceError,
    CutoffError,
    DegenerateMetricError,
    DomainError,
    EmbeddingError,
    GeometryError,
    NormalizationError,
    NumericalError,
    UnsupportedKernelError,
)
from .kernels import KernelConfig, make_gaussian, make_kernel, make_membrane, make_random_wave, normalize

__version__ = "0.1.0"
