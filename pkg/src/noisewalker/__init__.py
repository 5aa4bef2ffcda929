"""Noise-model-aware random walker image segmentation.

Edge weights are Bhattacharyya coefficients between the posterior parameter
distributions of adjacent pixels' sample neighborhoods under a configurable
noise model (Poisson, constant-covariance Gaussian, variable-variance
Gaussian) with the classic exponential intensity weight as the baseline.
"""

from .graph_core import (
    LatticeGraph,
    ProbabilityField,
    SeedMap,
    SolverConvergenceError,
    build_graph,
    segment,
    solve_dirichlet,
)
from .noise_models import (
    GaussianConstCovConfig,
    GaussianVarVarConfig,
    GradyConfig,
    PoissonConfig,
    SampleSet,
    model_from_name,
    weight_gaussian_const,
    weight_gaussian_var,
    weight_grady,
    weight_numeric,
    weight_poisson,
    weight_poisson_approx,
)

__version__ = "0.1.0"

__all__ = [
    "LatticeGraph",
    "ProbabilityField",
    "SeedMap",
    "SolverConvergenceError",
    "build_graph",
    "segment",
    "solve_dirichlet",
    "GaussianConstCovConfig",
    "GaussianVarVarConfig",
    "GradyConfig",
    "PoissonConfig",
    "SampleSet",
    "model_from_name",
    "weight_gaussian_const",
    "weight_gaussian_var",
    "weight_grady",
    "weight_numeric",
    "weight_poisson",
    "weight_poisson_approx",
    "__version__",
]
