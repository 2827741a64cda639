"""Riemannian geometry of symmetric positive definite matrices under O(n)-invariant metrics."""
from .classical_metrics import (
    MetricId,
    dist,
    exp_map,
    geodesic_domain,
    inner,
    log_map,
    parallel_transport,
    sectional_curvature,
)
from .exceptions import (
    ConvergenceError,
    DomainError,
    GeodesicBoundaryError,
    InvalidSpecError,
    NotSPDError,
    NotSymmetricError,
    SpdGeoError,
    UnsupportedOperationError,
)
from .geodesic_engine import IntegratorConfig, hamiltonian_geodesic
from .invariant_metrics import MetricTriple, gram_matrix, metric_eval, validate_triple
from .kernel_family import BostSpec, KernelSpec, SeparableSpec, builtin_kernel

__version__ = "0.1.0"

__all__ = [
    "BostSpec",
    "ConvergenceError",
    "DomainError",
    "GeodesicBoundaryError",
    "IntegratorConfig",
    "InvalidSpecError",
    "KernelSpec",
    "MetricId",
    "MetricTriple",
    "NotSPDError",
    "NotSymmetricError",
    "SeparableSpec",
    "SpdGeoError",
    "UnsupportedOperationError",
    "builtin_kernel",
    "dist",
    "exp_map",
    "geodesic_domain",
    "gram_matrix",
    "hamiltonian_geodesic",
    "inner",
    "log_map",
    "metric_eval",
    "parallel_transport",
    "sectional_curvature",
    "validate_triple",
]
