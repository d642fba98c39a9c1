"""
Normal-mixture approximation f^(k): density, sampling, weights and entropy
"""
import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr, field_validator, model_validator
from scipy.special import logsumexp

from ..core.errors import DegenerateSampleError, ParameterError
from ..core.parallel import parallel_map
from ..model.linalg import cholesky_jittered

LOG_2PI = math.log(2.0 * math.pi)
ZERO_WEIGHT = 1e-300
DENSITY_CHUNK = 32


class NormalMixture(BaseModel):
    """
    n Gaussian components with means (n x p), lower Cholesky factors of
    their covariances (n x p x p) and weights summing to one.

    Immutable; inverse factors and log-determinants are cached at construction.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    means: np.ndarray
    factors: np.ndarray
    weights: np.ndarray

    _inverse_factors: np.ndarray = PrivateAttr()
    _log_dets: np.ndarray = PrivateAttr()

    @field_validator("means", "factors", "weights", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.array(value, dtype=float)

    @model_validator(mode="after")
    def _check(self):
        if self.means.ndim != 2:
            raise ValueError(f"means must be n x p, got shape {self.means.shape}")
        n, p = self.means.shape
        if self.factors.shape != (n, p, p):
            raise ValueError(f"factors must have shape {(n, p, p)}, got {self.factors.shape}")
        if self.weights.shape != (n,):
            raise ValueError(f"weights must have shape {(n,)}, got {self.weights.shape}")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to one")
        diag = np.diagonal(self.factors, axis1=1, axis2=2)
        if not np.all(diag > 0):
            raise ValueError("covariance factors need a strictly positive diagonal")
        if not (np.all(np.isfinite(self.means)) and np.all(np.isfinite(self.factors))):
            raise ValueError("mixture means and factors must be finite")
        for array in (self.means, self.factors, self.weights):
            array.setflags(write=False)
        eye = np.broadcast_to(np.eye(p), self.factors.shape)
        self._inverse_factors = np.linalg.solve(self.factors, eye)
        self._log_dets = 2.0 * np.sum(np.log(diag), axis=1)
        return self

    @classmethod
    def from_covariances(cls, means, covariances, weights) -> "NormalMixture":
        covariances = np.asarray(covariances, dtype=float)
        factors = np.stack(
            [cholesky_jittered(c, what=f"component {j} covariance") for j, c in enumerate(covariances)]
        )
        return cls(means=means, factors=factors, weights=weights)

    @property
    def size(self) -> int:
        return self.means.shape[0]

    @property
    def dimension(self) -> int:
        return self.means.shape[1]

    @property
    def covariances(self) -> np.ndarray:
        return self.factors @ np.transpose(self.factors, (0, 2, 1))


class WeightedSample(BaseModel):
    """Sample points with log target, log proposal, importance and flattened weights"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    points: np.ndarray
    log_post: np.ndarray
    log_prop: np.ndarray
    w: np.ndarray
    v: np.ndarray
    gamma: float

    @classmethod
    def from_log_densities(cls, points, log_post, log_prop) -> "WeightedSample":
        """Normalize w proportional to exp(log_post - log_prop) with max subtraction"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        log_post = np.asarray(log_post, dtype=float)
        log_prop = np.asarray(log_prop, dtype=float)
        with np.errstate(invalid="ignore"):
            log_ratio = log_post - log_prop
        finite = np.isfinite(log_ratio)
        if not finite.any():
            raise DegenerateSampleError(
                "every importance weight is zero (no finite posterior evaluation)"
            )
        shifted = np.full_like(log_ratio, -np.inf)
        shifted[finite] = log_ratio[finite] - log_ratio[finite].max()
        w = np.exp(shifted)
        w /= w.sum()
        v, gamma = flatten_weights(w)
        return cls(points=points, log_post=log_post, log_prop=log_prop, w=w, v=v, gamma=gamma)


def mixture_log_density(mix: NormalMixture, points, workers: Optional[int] = None):
    """log sum_j w_j N(x; mean_j, V_j) by log-sum-exp, over fixed component chunks"""
    single = np.ndim(points) == 1
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[1] != mix.dimension:
        raise ParameterError(f"points have dimension {X.shape[1]}, mixture has {mix.dimension}")
    p = mix.dimension
    with np.errstate(divide="ignore"):
        log_w = np.log(mix.weights)
    inverse = mix._inverse_factors
    log_dets = mix._log_dets

    def chunk_density(start: int) -> np.ndarray:
        idx = slice(start, start + DENSITY_CHUNK)
        diff = X[None, :, :] - mix.means[idx, None, :]
        z = np.einsum("cij,cmj->cmi", inverse[idx], diff)
        q = np.sum(z * z, axis=-1)
        log_terms = (log_w[idx, None] - 0.5 * (p * LOG_2PI + log_dets[idx, None])) - 0.5 * q
        with np.errstate(divide="ignore", invalid="ignore"):
            return logsumexp(log_terms, axis=0)

    parts = parallel_map(chunk_density, range(0, mix.size, DENSITY_CHUNK), workers)
    with np.errstate(divide="ignore", invalid="ignore"):
        result = logsumexp(np.vstack(parts), axis=0)
    result = np.where(np.isnan(result), -np.inf, result)
    return float(result[0]) if single else result


def mixture_sample(mix: NormalMixture, count: int, rng: np.random.Generator) -> np.ndarray:
    """Pick a component by weight, then mean + factor @ z"""
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    components = rng.choice(mix.size, size=count, p=mix.weights)
    z = rng.standard_normal((count, mix.dimension))
    return mix.means[components] + np.einsum("cij,cj->ci", mix.factors[components], z)


def mixture_moments(mix: NormalMixture) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic mean and covariance of the mixture"""
    w = mix.weights
    mean = w @ mix.means
    second = np.einsum("j,jab->ab", w, mix.covariances) + np.einsum(
        "j,ja,jb->ab", w, mix.means, mix.means
    )
    return mean, second - np.outer(mean, mean)


def entropy(w) -> float:
    """gamma = -(1 / log n) sum w_i log w_i with 0 log 0 := 0; gamma := 1 for n = 1"""
    w = np.asarray(w, dtype=float)
    n = w.size
    if n == 0:
        raise ParameterError("entropy of an empty weight vector")
    if n == 1:
        return 1.0
    positive = w[w >= ZERO_WEIGHT]
    value = -float(np.sum(positive * np.log(positive))) / math.log(n)
    return max(0.0, min(1.0, value))


def flatten_weights(w) -> Tuple[np.ndarray, float]:
    """v_i proportional to w_i ** gamma, gamma the entropy of w"""
    w = np.asarray(w, dtype=float)
    if w.size == 1:
        return np.ones(1), 1.0
    gamma = entropy(w)
    if gamma == 0.0:
        # w ** 0 is 1 for every point
        return np.full(w.size, 1.0 / w.size), 0.0
    positive = w >= ZERO_WEIGHT
    v = np.where(positive, np.power(np.where(positive, w, 1.0), gamma), 0.0)
    v /= v.sum()
    return v, gamma


def weighted_covariance(points, weights) -> np.ndarray:
    """sum_i w_i (x_i - xbar)(x_i - xbar)^T with xbar the weighted mean"""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    w = np.asarray(weights, dtype=float)
    if np.count_nonzero(w > 0) < 2:
        raise DegenerateSampleError("weighted covariance needs at least two points with positive weight")
    w = w / w.sum()
    centered = X - w @ X
    cov = (centered * w[:, None]).T @ centered
    return 0.5 * (cov + cov.T)
