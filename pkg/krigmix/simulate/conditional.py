"""
Conditional simulation of Y on grid cells given theta and the data z = H y

Covariances follow the model: sigma2 ((1 - tau) rho + tau 1(i = j)). The
nugget is attached to individual locations, so grid cells carry their own
independent nugget (dropped with predict_smooth_only) and the grid-to-data
covariance is sigma2 (1 - tau) rho H^T.

Large grids are simulated in row-major blocks of `block_size` cells; each
block conditions on the data and on the `max_neighbors` already simulated
cells closest to it in the scaled distance.
"""
import math
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg
from loguru import logger
from scipy.linalg import solve_triangular
from scipy.spatial import cKDTree

from ..core.errors import FactorizationError, ParameterError, SimulationError
from ..model.correlation import coordinate_map, correlation_matrix, cross_correlation
from ..model.linalg import cholesky_jittered
from ..model.trend import design_matrix
from ..model.types import Dataset, NaturalParams, TrendSpec
from .grid import PredictionGrid, cell_centers

BLOCK_SIZE = 5000
MAX_NEIGHBORS = 500
# pivots below this fraction of the reference variance switch the draw to eigh
PIVOT_FLOOR = 1e-12
# negative eigenvalues beyond this fraction of the reference variance mean a non-PSD matrix
NEGATIVE_TOLERANCE = 1e-8

GridLike = Union[PredictionGrid, np.ndarray]


def _target_points(grid: GridLike) -> np.ndarray:
    if isinstance(grid, PredictionGrid):
        return cell_centers(grid)
    points = np.asarray(grid, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    return points


def _moments(
    theta: NaturalParams,
    data: Dataset,
    trend: TrendSpec,
    targets: np.ndarray,
    known_points: Optional[np.ndarray] = None,
    known_values: Optional[np.ndarray] = None,
    predict_smooth_only: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of Y(targets) given the data and optional already simulated cells"""
    if len(theta.beta) != trend.p:
        raise ParameterError(f"beta has {len(theta.beta)} entries, trend needs {trend.p}")
    if targets.shape[1] != data.d:
        raise ParameterError(f"grid is {targets.shape[1]}-D, data are {data.d}-D")
    corr, tau, sigma2 = theta.corr, theta.tau, theta.sigma2
    beta = np.asarray(theta.beta, dtype=float)
    cell_nugget = 0.0 if predict_smooth_only else tau

    mean = design_matrix(targets, trend) @ beta
    C_tt = cross_correlation(targets, targets, corr, tau)
    C_tt[np.diag_indices_from(C_tt)] = 1.0 - tau + cell_nugget

    has_data = data.m > 0
    has_known = known_points is not None and len(known_points) > 0
    if not has_data and not has_known:
        return mean, sigma2 * C_tt

    # conditioning vector: data first, then already simulated cells
    if has_data:
        H = data.H if data.H is not None else np.eye(data.n)
        S = H @ correlation_matrix(data.locations, corr, tau) @ H.T
        cross = cross_correlation(targets, data.locations, corr, tau) @ H.T
        residual = data.values - H @ design_matrix(data.locations, trend) @ beta
    if has_known:
        K = np.asarray(known_points, dtype=float)
        C_kk = cross_correlation(K, K, corr, tau)
        C_kk[np.diag_indices_from(C_kk)] = 1.0 - tau + cell_nugget
        C_tk = cross_correlation(targets, K, corr, tau)
        residual_k = np.asarray(known_values, dtype=float) - design_matrix(K, trend) @ beta
        if has_data:
            C_kd = cross_correlation(K, data.locations, corr, tau) @ H.T
            S = np.block([[S, C_kd.T], [C_kd, C_kk]])
            cross = np.hstack([cross, C_tk])
            residual = np.concatenate([residual, residual_k])
        else:
            S, cross, residual = C_kk, C_tk, residual_k
    S = 0.5 * (S + S.T)

    L = cholesky_jittered(S, what="conditioning covariance")
    A = solve_triangular(L, cross.T, lower=True)
    alpha = solve_triangular(L, residual, lower=True)
    mean = mean + A.T @ alpha
    cov = C_tt - A.T @ A
    cov = sigma2 * 0.5 * (cov + cov.T)
    return mean, cov


def conditional_moments(
    theta: NaturalParams,
    data: Dataset,
    grid_points: GridLike,
    trend: Optional[TrendSpec] = None,
    predict_smooth_only: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    """Kriging mean (G) and conditional covariance (G x G) of Y at the grid cells"""
    trend = trend or TrendSpec()
    return _moments(
        theta,
        data,
        trend,
        _target_points(grid_points),
        predict_smooth_only=predict_smooth_only,
    )


def gaussian_draw(
    mean: np.ndarray,
    cov: np.ndarray,
    rng: np.random.Generator,
    scale: Optional[float] = None,
) -> np.ndarray:
    """
    One draw from N(mean, cov).

    Cholesky when the pivots are healthy, otherwise a symmetric
    eigendecomposition with round-off eigenvalues clipped to zero, so that
    cells with zero conditional variance reproduce the mean. Tolerances are
    relative to `scale` (the unconditional variance) when given, otherwise to
    the largest variance in `cov`.
    """
    size = mean.shape[0]
    z = rng.standard_normal(size)
    if size == 0:
        return mean.copy()
    top = float(np.max(np.diag(cov)))
    reference = max(top, scale or 0.0)
    if top <= 0.0:
        return mean.copy()
    try:
        L = scipy.linalg.cholesky(cov, lower=True)
        if float(np.min(np.diag(L))) ** 2 > PIVOT_FLOOR * reference:
            return mean + L @ z
    except (np.linalg.LinAlgError, ValueError):
        pass
    eigenvalues, vectors = scipy.linalg.eigh(cov)
    largest = float(max(eigenvalues[-1], 0.0))
    if eigenvalues[0] < -NEGATIVE_TOLERANCE * reference:
        raise SimulationError(
            f"conditional covariance is not positive semi-definite "
            f"(eigenvalue {eigenvalues[0]:.3g}, largest {largest:.3g})"
        )
    floor = size * np.finfo(float).eps * reference
    roots = np.sqrt(np.where(eigenvalues > floor, eigenvalues, 0.0))
    return mean + vectors @ (roots * z)


def _nearest_known(
    block_points: np.ndarray,
    known_points: np.ndarray,
    mapping: np.ndarray,
    count: int,
) -> np.ndarray:
    """Indices of the `count` known cells closest to the block, ties by index"""
    if known_points.shape[0] <= count:
        return np.arange(known_points.shape[0])
    tree = cKDTree(block_points @ mapping)
    distances, _ = tree.query(known_points @ mapping, k=1)
    order = np.lexsort((np.arange(known_points.shape[0]), distances))
    return np.sort(order[:count])


def conditional_simulate(
    theta: NaturalParams,
    data: Dataset,
    grid: GridLike,
    rng: np.random.Generator,
    trend: Optional[TrendSpec] = None,
    predict_smooth_only: bool = False,
    block_size: int = BLOCK_SIZE,
    max_neighbors: int = MAX_NEIGHBORS,
) -> np.ndarray:
    """One realization of Y at every grid cell, in grid order"""
    trend = trend or TrendSpec()
    targets = _target_points(grid)
    G = targets.shape[0]
    if block_size < 1:
        raise ParameterError(f"block_size must be >= 1, got {block_size}")
    try:
        if G <= block_size:
            mean, cov = _moments(theta, data, trend, targets, predict_smooth_only=predict_smooth_only)
            return gaussian_draw(mean, cov, rng, scale=theta.sigma2)

        mapping = coordinate_map(theta.corr, targets.shape[1])
        values = np.empty(G)
        blocks = math.ceil(G / block_size)
        logger.debug(f"simulating {G} cells in {blocks} blocks of {block_size}")
        for b in range(blocks):
            start, stop = b * block_size, min((b + 1) * block_size, G)
            block = targets[start:stop]
            known_points = known_values = None
            if start > 0:
                chosen = _nearest_known(block, targets[:start], mapping, max_neighbors)
                known_points = targets[chosen]
                known_values = values[chosen]
            mean, cov = _moments(
                theta,
                data,
                trend,
                block,
                known_points,
                known_values,
                predict_smooth_only,
            )
            values[start:stop] = gaussian_draw(mean, cov, rng, scale=theta.sigma2)
        return values
    except FactorizationError as e:
        raise SimulationError(str(e)) from e
