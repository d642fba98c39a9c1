"""
Anisotropic scaled distance and the Matern correlation

Rotation convention (2-D): T rotates the natural axes counter-clockwise by the
angle alpha, and scale lambda_k applies along the k-th rotated axis, so
B = T diag(lambda^-2) T^T and l(x1, x2) = |diag(1/lambda) T^T (x1 - x2)|.
"""
import math

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform
from scipy.special import gammaln, kve

from ..core.errors import ParameterError
from .types import CorrelationParams

MATERN_ZERO = 1e-10
LOG2 = math.log(2.0)


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _scales(corr: CorrelationParams, dimension: int) -> np.ndarray:
    scales = np.asarray(corr.scales, dtype=float)
    if scales.size == 1:
        scales = np.repeat(scales, dimension)
    if scales.size != dimension:
        raise ParameterError(f"{scales.size} scales for {dimension}-D locations")
    if np.any(scales <= 0):
        raise ParameterError(f"scales must be positive, got {corr.scales}")
    return scales


def coordinate_map(corr: CorrelationParams, dimension: int) -> np.ndarray:
    """M with M M^T = B, so that l(x1, x2) = |(x1 - x2) M|"""
    scales = _scales(corr, dimension)
    if corr.angle is None:
        return np.diag(1.0 / scales)
    if dimension != 2:
        raise ParameterError("a rotation angle needs 2-D locations")
    return rotation_matrix(corr.angle) @ np.diag(1.0 / scales)


def anisotropy_matrix(corr: CorrelationParams, dimension: int) -> np.ndarray:
    """B(lambda, T) = T diag(lambda^-2) T^T"""
    m = coordinate_map(corr, dimension)
    return m @ m.T


def scaled_distance(x1, x2, corr: CorrelationParams) -> float:
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x1.shape != x2.shape:
        raise ParameterError(f"location dimensions differ: {x1.shape} vs {x2.shape}")
    delta = (x1 - x2) @ coordinate_map(corr, x1.size)
    return float(np.sqrt(delta @ delta))


def pairwise_scaled_distances(a, b, corr: CorrelationParams) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    m = coordinate_map(corr, a.shape[1])
    return cdist(a @ m, b @ m)


def matern(ell, kappa: float):
    """
    Matern correlation rho(l; kappa) = l^kappa K_kappa(l) / (2^(kappa-1) Gamma(kappa)).

    Evaluated in log space with the exponentially scaled Bessel function;
    rho = 1 for l below 1e-10.
    """
    if not kappa > 0:
        raise ParameterError(f"kappa must be > 0, got {kappa}")
    ell_arr = np.asarray(ell, dtype=float)
    if np.any(ell_arr < 0) or np.any(np.isnan(ell_arr)):
        raise ParameterError("scaled distances must be non-negative")
    rho = np.ones_like(ell_arr)
    mask = ell_arr >= MATERN_ZERO
    if np.any(mask):
        x = ell_arr[mask]
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            log_rho = (
                (1.0 - kappa) * LOG2
                - gammaln(kappa)
                + kappa * np.log(x)
                + np.log(kve(kappa, x))
                - x
            )
            # kve overflows only for l tiny relative to kappa, where rho -> 1
            rho[mask] = np.where(np.isnan(log_rho) | (log_rho > 0), 1.0, np.exp(log_rho))
    if rho.ndim == 0:
        return float(rho)
    return rho


def correlation_matrix(locations, corr: CorrelationParams, tau: float) -> np.ndarray:
    """R_ij = (1 - tau) rho(l(x_i, x_j)) + tau 1(i = j); exactly symmetric, unit diagonal"""
    if not 0.0 <= tau < 1.0:
        raise ParameterError(f"tau must lie in [0, 1), got {tau}")
    locations = np.atleast_2d(np.asarray(locations, dtype=float))
    m = coordinate_map(corr, locations.shape[1])
    distances = squareform(pdist(locations @ m))
    R = (1.0 - tau) * matern(distances, corr.kappa)
    np.fill_diagonal(R, 1.0)
    return R


def cross_correlation(a, b, corr: CorrelationParams, tau: float) -> np.ndarray:
    """(1 - tau) rho between two location sets; no nugget term"""
    return (1.0 - tau) * matern(pairwise_scaled_distances(a, b, corr), corr.kappa)
