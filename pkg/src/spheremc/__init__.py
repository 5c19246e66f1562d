"""MCMC toolkit for distributions on the unit sphere.

Geodesic slice sampling (rejection and shrinkage variants) plus baseline
kernels (geodesic random walk, reprojected random-walk Metropolis-Hastings,
spherical Hamiltonian Monte Carlo), exact reference samplers, diagnostics
and a configuration-driven experiment harness.
"""

from . import diagnostics, exact, geometry, harness, samplers, targets
from .errors import (
    ConfigError,
    DegenerateTangentError,
    GradientError,
    RejectionLimitError,
    SphereMCError,
)
from .samplers import Chain, SamplerConfig, TauSpec, TuningConfig, run_chain
from .targets import (
    Bingham,
    CurvedVonMisesFisher,
    LogDensity,
    Uniform,
    VonMisesFisher,
    VonMisesFisherMixture,
)

__all__ = [
    "Bingham",
    "Chain",
    "ConfigError",
    "CurvedVonMisesFisher",
    "DegenerateTangentError",
    "GradientError",
    "LogDensity",
    "RejectionLimitError",
    "SamplerConfig",
    "SphereMCError",
    "TauSpec",
    "TuningConfig",
    "Uniform",
    "VonMisesFisher",
    "VonMisesFisherMixture",
    "diagnostics",
    "exact",
    "geometry",
    "harness",
    "run_chain",
    "samplers",
    "targets",
]

__version__ = "0.1.0"
