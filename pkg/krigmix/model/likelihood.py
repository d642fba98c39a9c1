"""
Gaussian log-likelihood for point data and for linear (aggregated) data
"""
import math

import numpy as np
from scipy.linalg import solve_triangular

from ..core.errors import FactorizationError, ParameterError
from .correlation import correlation_matrix
from .linalg import cholesky_jittered
from .trend import design_matrix
from .types import Dataset, NaturalParams, TrendSpec

LOG_2PI = math.log(2.0 * math.pi)


def _check_trend(theta: NaturalParams, trend: TrendSpec):
    if len(theta.beta) != trend.p:
        raise ParameterError(f"beta has {len(theta.beta)} entries, trend needs {trend.p}")


def _reject_coincident(R: np.ndarray, theta: NaturalParams):
    """Coincident locations with zero nugget give identical rows in R"""
    pairs = np.argwhere(np.triu(R, 1) >= 1.0)
    if pairs.size:
        i, j = (int(k) for k in pairs[0])
        raise FactorizationError(
            f"locations {i} and {j} coincide and tau = 0; correlation matrix is singular",
            theta=theta,
            pair=(i, j),
        )


def _factor(matrix: np.ndarray, theta: NaturalParams, what: str) -> np.ndarray:
    try:
        return cholesky_jittered(matrix, what=what)
    except FactorizationError as e:
        raise FactorizationError(f"{e} (theta={theta})", theta=theta) from e


def gaussian_log_density(residual: np.ndarray, factor: np.ndarray, sigma2: float) -> float:
    """log N(residual; 0, sigma2 * L L^T) from the lower Cholesky factor L"""
    m = residual.shape[0]
    alpha = solve_triangular(factor, residual, lower=True)
    return float(
        -0.5 * m * (LOG_2PI + math.log(sigma2))
        - np.sum(np.log(np.diag(factor)))
        - 0.5 * (alpha @ alpha) / sigma2
    )


def log_likelihood(theta: NaturalParams, data: Dataset, trend: TrendSpec) -> float:
    """Log-likelihood of point data y observed at the dataset locations"""
    if data.H is not None:
        raise ParameterError("dataset carries H; use log_likelihood_linear")
    if data.n < 1:
        raise ParameterError("log_likelihood needs at least one observation")
    _check_trend(theta, trend)
    X = design_matrix(data.locations, trend)
    R = correlation_matrix(data.locations, theta.corr, theta.tau)
    if theta.tau == 0.0:
        _reject_coincident(R, theta)
    L = _factor(R, theta, "correlation matrix")
    residual = data.values - X @ np.asarray(theta.beta)
    return gaussian_log_density(residual, L, theta.sigma2)


def log_likelihood_linear(theta: NaturalParams, data: Dataset, trend: TrendSpec) -> float:
    """
    Log-likelihood of linear data z = H y.

    The variance factor of the aggregated likelihood is sigma2 itself; the
    model defines no other variance.
    """
    if data.m < 1:
        raise ParameterError("log_likelihood_linear needs at least one datum")
    _check_trend(theta, trend)
    H = data.H if data.H is not None else np.eye(data.n)
    X = design_matrix(data.locations, trend)
    R = correlation_matrix(data.locations, theta.corr, theta.tau)
    S = H @ R @ H.T
    S = 0.5 * (S + S.T)
    L = _factor(S, theta, "aggregated correlation matrix H R H^T")
    residual = data.values - H @ X @ np.asarray(theta.beta)
    return gaussian_log_density(residual, L, theta.sigma2)


def dataset_log_likelihood(theta: NaturalParams, data: Dataset, trend: TrendSpec) -> float:
    if data.H is None:
        return log_likelihood(theta, data, trend)
    return log_likelihood_linear(theta, data, trend)
