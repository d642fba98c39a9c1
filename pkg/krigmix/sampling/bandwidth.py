"""
Localization fraction r and bandwidth h for the mixture kernels

(r, h) maximize the weighted leave-one-out log-likelihood J of the sample
under the mixture sum_j w_j N(theta; theta_j, h Sigma_j). r is searched on
1, 1/2, 1/4, ... with nested Mahalanobis neighbourhoods; h by a log-scale
grid followed by bounded Brent refinement.
"""
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict
from scipy.linalg import solve_triangular
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from ..core.errors import DegenerateSampleError, FactorizationError, ParameterError
from ..core.parallel import parallel_map
from ..model.linalg import cholesky_jittered
from .mixture import weighted_covariance

LOG_2PI = math.log(2.0 * math.pi)
H_BOUNDS = (1e-4, 1e4)
H_TOLERANCE = 1e-3
H_MAX_ITER = 60
H_GRID_POINTS = 41
GEOMETRY_CHUNK = 64
# finite stand-in for J = -inf inside the scalar minimizer
MINIMIZER_CEILING = 1e300


class TuningResult(BaseModel):
    """Selected (r*, h*), the matching Sigma_i* and the achieved J*"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r_star: float
    h_star: float
    sigmas: np.ndarray
    j_star: float
    visited: List[Tuple[float, float, float]] = []
    fallbacks: int = 0

    @property
    def covariances(self) -> np.ndarray:
        """V_i = h* Sigma_i*"""
        return self.h_star * self.sigmas


class KernelGeometry:
    """
    Squared Mahalanobis distances q[j, i] = |L_j^-1 (theta_i - theta_j)|^2 and
    log |Sigma_j|. J(h) only rescales q, so one geometry serves the whole h search.
    """

    def __init__(self, q: np.ndarray, log_dets: np.ndarray, dimension: int):
        self.q = q
        self.log_dets = log_dets
        self.dimension = dimension

    @classmethod
    def from_sigmas(cls, points, sigmas, workers: Optional[int] = None) -> "KernelGeometry":
        X = np.asarray(points, dtype=float)
        n, p = X.shape
        sigmas = np.asarray(sigmas, dtype=float)
        if sigmas.shape == (p, p):
            factor = cholesky_jittered(sigmas, what="sample covariance")
            factors = np.broadcast_to(factor, (n, p, p))
        elif sigmas.shape == (n, p, p):
            factors = np.stack(
                [cholesky_jittered(s, what=f"kernel covariance {j}") for j, s in enumerate(sigmas)]
            )
        else:
            raise ParameterError(f"sigmas must be {(p, p)} or {(n, p, p)}, got {sigmas.shape}")
        inverse = np.linalg.solve(factors, np.broadcast_to(np.eye(p), (n, p, p)))
        log_dets = 2.0 * np.sum(np.log(np.diagonal(factors, axis1=1, axis2=2)), axis=1)

        def chunk_distances(start: int) -> np.ndarray:
            idx = slice(start, start + GEOMETRY_CHUNK)
            diff = X[None, :, :] - X[idx, None, :]
            z = np.einsum("cij,cmj->cmi", inverse[idx], diff)
            return np.sum(z * z, axis=-1)

        q = np.vstack(parallel_map(chunk_distances, range(0, n, GEOMETRY_CHUNK), workers))
        return cls(q, log_dets, p)

    def objective(self, w, h: float) -> float:
        """J(h) = sum_i w_i log( sum_{j != i} w_j N(theta_i; theta_j, h Sigma_j) / (1 - w_i) )"""
        w = np.asarray(w, dtype=float)
        if np.any(w >= 1.0):
            raise ParameterError("leave-one-out objective is undefined when a weight equals 1")
        with np.errstate(divide="ignore"):
            log_w = np.log(w)
        log_terms = (log_w - 0.5 * self.log_dets)[:, None] - self.q / (2.0 * h)
        np.fill_diagonal(log_terms, -np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            loo = logsumexp(log_terms, axis=0) - 0.5 * self.dimension * (LOG_2PI + math.log(h))
        active = w > 0
        values = loo[active] - np.log1p(-w[active])
        if not np.all(np.isfinite(values)):
            return -math.inf
        return float(np.sum(w[active] * values))


def loo_objective(points, w, sigmas, h: float, workers: Optional[int] = None) -> float:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.shape[0] < 2:
        raise ParameterError("leave-one-out objective needs at least two points")
    return KernelGeometry.from_sigmas(points, sigmas, workers).objective(w, h)


def _maximize_h(
    geometry: KernelGeometry,
    w,
    bounds: Tuple[float, float] = H_BOUNDS,
    tolerance: float = H_TOLERANCE,
    max_iter: int = H_MAX_ITER,
) -> Tuple[float, float]:
    grid = np.linspace(math.log(bounds[0]), math.log(bounds[1]), H_GRID_POINTS)
    values = np.array([geometry.objective(w, math.exp(t)) for t in grid])
    if not np.any(np.isfinite(values)):
        raise DegenerateSampleError(
            f"leave-one-out objective is -inf for every h in {bounds}; degenerate sample geometry"
        )
    k = int(np.argmax(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]

    def negative(t: float) -> float:
        value = geometry.objective(w, math.exp(t))
        return -value if math.isfinite(value) else MINIMIZER_CEILING

    result = minimize_scalar(
        negative,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": tolerance, "maxiter": max_iter},
    )
    h_refined = math.exp(float(result.x))
    j_refined = geometry.objective(w, h_refined)
    if j_refined >= values[k]:
        return h_refined, j_refined
    return math.exp(float(grid[k])), float(values[k])


def optimize_h(
    points,
    w,
    sigmas,
    bounds: Tuple[float, float] = H_BOUNDS,
    tolerance: float = H_TOLERANCE,
    max_iter: int = H_MAX_ITER,
    workers: Optional[int] = None,
) -> Tuple[float, float]:
    """Maximize J over h in bounds (log scale); returns (h*, J*)"""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    geometry = KernelGeometry.from_sigmas(points, sigmas, workers)
    return _maximize_h(geometry, w, bounds, tolerance, max_iter)


def neighborhood_size(r: float, n: int) -> int:
    return int(math.ceil(r * n))


def localize(
    points,
    v,
    sigmas,
    neighborhoods: Sequence[np.ndarray],
    r: float,
    workers: Optional[int] = None,
) -> Tuple[List[np.ndarray], np.ndarray, int]:
    """
    Shrink every Theta_i to its ceil(r n) Mahalanobis-closest members (theta_i
    itself first, ties broken by index) and recompute Sigma_i from them with v
    renormalized inside the neighbourhood. A neighbourhood whose covariance
    cannot be factorized keeps its previous Sigma_i.

    Returns the new neighbourhoods, the new sigmas and the fallback count.
    """
    X = np.asarray(points, dtype=float)
    v = np.asarray(v, dtype=float)
    n, p = X.shape
    size = neighborhood_size(r, n)
    if size < p + 1:
        raise ParameterError(
            f"neighbourhoods of {size} points cannot give a full-rank {p}-D covariance"
        )
    sigmas = np.asarray(sigmas, dtype=float)

    def shrink(i: int):
        candidates = np.asarray(neighborhoods[i])
        factor = cholesky_jittered(sigmas[i], what=f"kernel covariance {i}")
        z = solve_triangular(factor, (X[candidates] - X[i]).T, lower=True)
        d2 = np.sum(z * z, axis=0)
        d2[candidates == i] = -1.0
        order = np.lexsort((candidates, d2))
        keep = np.sort(candidates[order[: min(size, candidates.size)]])
        weights = v[keep]
        try:
            if not weights.sum() > 0:
                raise DegenerateSampleError("neighbourhood carries no weight")
            sigma = weighted_covariance(X[keep], weights)
            cholesky_jittered(sigma, what=f"neighbourhood covariance {i}")
            return keep, sigma, False
        except (DegenerateSampleError, FactorizationError):
            return keep, sigmas[i], True

    results = parallel_map(shrink, range(n), workers)
    new_neighborhoods = [keep for keep, _, _ in results]
    new_sigmas = np.stack([sigma for _, sigma, _ in results])
    fallbacks = sum(1 for _, _, fell_back in results if fell_back)
    if fallbacks:
        logger.warning(f"r={r}: {fallbacks} neighbourhood covariances fell back to the previous level")
    return new_neighborhoods, new_sigmas, fallbacks


def select_tuning(
    points,
    w,
    v,
    threshold_r: float = 0.125,
    h_bounds: Tuple[float, float] = H_BOUNDS,
    h_tolerance: float = H_TOLERANCE,
    h_max_iter: int = H_MAX_ITER,
    workers: Optional[int] = None,
) -> TuningResult:
    """Discrete search over r = 1, 1/2, ... down to threshold_r, continuous search over h"""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n, p = X.shape
    if n < 2 * (p + 1):
        raise ParameterError(f"tuning needs n >= 2(p+1) = {2 * (p + 1)} points, got {n}")

    global_sigma = weighted_covariance(X, v)
    sigmas = np.array(np.broadcast_to(global_sigma, (n, p, p)))
    neighborhoods: List[np.ndarray] = [np.arange(n)] * n

    r = 1.0
    best: Optional[Tuple[float, float, float, np.ndarray]] = None
    visited: List[Tuple[float, float, float]] = []
    fallbacks = 0
    last_error: Optional[Exception] = None
    while True:
        try:
            geometry = KernelGeometry.from_sigmas(X, sigmas, workers)
            h, j = _maximize_h(geometry, w, h_bounds, h_tolerance, h_max_iter)
            visited.append((r, h, j))
            logger.debug(f"tuning r={r:g}: h={h:.4g} J={j:.6g}")
            if best is None or j > best[2]:
                best = (r, h, j, sigmas)
        except (DegenerateSampleError, FactorizationError) as e:
            logger.warning(f"tuning level r={r:g} skipped: {e}")
            last_error = e
        if r <= threshold_r:
            break
        next_r = r / 2.0
        if neighborhood_size(next_r, n) < p + 1:
            logger.debug(f"stopping localization at r={r:g}: too few points for {p}-D covariances")
            break
        r = next_r
        neighborhoods, sigmas, fell_back = localize(X, v, sigmas, neighborhoods, r, workers)
        fallbacks += fell_back

    if best is None:
        raise DegenerateSampleError(f"bandwidth search failed at every localization level: {last_error}")
    r_star, h_star, j_star, sigmas_star = best
    return TuningResult(
        r_star=r_star,
        h_star=h_star,
        sigmas=sigmas_star,
        j_star=j_star,
        visited=visited,
        fallbacks=fallbacks,
    )
