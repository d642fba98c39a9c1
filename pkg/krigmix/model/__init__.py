"""
Spatial model: trend, anisotropic Matern correlation and Gaussian likelihoods
"""
from .correlation import (
    anisotropy_matrix,
    coordinate_map,
    correlation_matrix,
    cross_correlation,
    matern,
    pairwise_scaled_distances,
    rotation_matrix,
    scaled_distance,
)
from .likelihood import dataset_log_likelihood, log_likelihood, log_likelihood_linear
from .linalg import cholesky_jittered, log_det_from_cholesky
from .trend import design_matrix
from .types import (
    CorrelationParams,
    Dataset,
    ModelSpec,
    NaturalParams,
    TrendSpec,
    check_full_row_rank,
)

__all__ = [
    "TrendSpec",
    "CorrelationParams",
    "NaturalParams",
    "Dataset",
    "ModelSpec",
    "check_full_row_rank",
    "design_matrix",
    "rotation_matrix",
    "coordinate_map",
    "anisotropy_matrix",
    "scaled_distance",
    "pairwise_scaled_distances",
    "matern",
    "correlation_matrix",
    "cross_correlation",
    "cholesky_jittered",
    "log_det_from_cholesky",
    "log_likelihood",
    "log_likelihood_linear",
    "dataset_log_likelihood",
]
