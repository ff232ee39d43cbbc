"""Penalized spatial function-on-function regression."""

from ._sfofr import (
    BootstrapSurfaces,
    FitConfig,
    FitResult,
    InvalidArgumentError,
    IoError,
    NumericError,
    basis_eval,
    bootstrap_ci,
    fit,
    grid_search,
    inverse_distance_weights,
    knn_bisquare_weights,
    moran_curve,
    rrispee,
    simulate,
    true_beta_surface,
    true_rho_surface,
)

__all__ = [
    "BootstrapSurfaces",
    "FitConfig",
    "FitResult",
    "InvalidArgumentError",
    "IoError",
    "NumericError",
    "basis_eval",
    "bootstrap_ci",
    "fit",
    "grid_search",
    "inverse_distance_weights",
    "knn_bisquare_weights",
    "moran_curve",
    "rrispee",
    "simulate",
    "true_beta_surface",
    "true_rho_surface",
]
