"""
Iterative posterior approximation

Each iteration samples from f^(k-1), weights the sample against the
unnormalized posterior, retunes (r, h) and rebuilds the mixture f^(k).
"""
import math
import time
from typing import Callable, List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator

from ..core.errors import EngineError, KrigError, ParameterError
from ..core.parallel import parallel_map
from ..model.likelihood import dataset_log_likelihood
from ..model.trend import design_matrix
from ..model.types import Dataset, ModelSpec
from .bandwidth import H_BOUNDS, H_MAX_ITER, H_TOLERANCE, select_tuning
from .mixture import (
    NormalMixture,
    WeightedSample,
    mixture_log_density,
    mixture_sample,
)
from .priors import ParameterLayout, PriorSpec, from_working, log_prior_working

LogPosterior = Callable[[np.ndarray], float]


class RunConfig(BaseModel):
    """Sample-size schedule, iteration cap, early stop and tuning options"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    n0: int = 2000
    decay: float = 0.94
    k_max: int = 5
    gamma_stop: Optional[float] = None
    seed: int = 0
    threshold_r: float = 0.125
    h_bounds: Tuple[float, float] = H_BOUNDS
    h_tolerance: float = H_TOLERANCE
    h_max_iter: int = H_MAX_ITER
    # posterior draws written by `fit`
    samples: int = 1000

    @model_validator(mode="after")
    def _check(self):
        if not 0.0 < self.decay <= 1.0:
            raise ValueError(f"decay must lie in (0, 1], got {self.decay}")
        if self.k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {self.k_max}")
        if not 0.0 < self.threshold_r <= 1.0:
            raise ValueError(f"threshold_r must lie in (0, 1], got {self.threshold_r}")
        if self.gamma_stop is not None and not 0.0 < self.gamma_stop <= 1.0:
            raise ValueError(f"gamma_stop must lie in (0, 1], got {self.gamma_stop}")
        if not 0.0 < self.h_bounds[0] < self.h_bounds[1]:
            raise ValueError(f"h_bounds must be increasing and positive, got {self.h_bounds}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        return self

    def sample_size(self, k: int, dimension: int) -> int:
        """n_k = round(n0 * decay^(k-1)) for 1-based k, floored at 2(p+1)"""
        return max(int(round(self.n0 * self.decay ** (k - 1))), 2 * (dimension + 1))


class IterationDiagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    n: int
    gamma: float
    d_l1: float
    r_star: float
    h_star: float
    zero_weight_count: int
    wallclock: float = 0.0


def l1_distance(w) -> float:
    """Monte Carlo L1 distance estimate (1/n) sum |1 - n w_i|"""
    w = np.asarray(w, dtype=float)
    n = w.size
    return float(np.mean(np.abs(1.0 - n * w)))


def posterior_log_density(
    spec: ModelSpec,
    dataset: Dataset,
    prior: PriorSpec,
    layout: Optional[ParameterLayout] = None,
) -> LogPosterior:
    """Unnormalized working-scale log posterior: log prior (with Jacobian) + log likelihood"""
    layout = layout or ParameterLayout.from_model(spec)
    prior = prior.resolve(dataset)

    def log_post(theta_work: np.ndarray) -> float:
        lp = log_prior_working(theta_work, layout, prior)
        if not math.isfinite(lp):
            return -math.inf
        theta = from_working(theta_work, layout)
        return lp + dataset_log_likelihood(theta, dataset, spec.trend)

    return log_post


def init_approximation(spec: ModelSpec, dataset: Dataset, prior: PriorSpec) -> NormalMixture:
    """
    Diffuse single Gaussian: beta at OLS with sd 10x the OLS standard error,
    log sigma2 at the log residual variance (sd 3), log scales at log(L/2)
    (sd 2), logits of tau and the angle at 0 (sd 2.5), log kappa at the log of
    the prior mode (sd 1).
    """
    layout = ParameterLayout.from_model(spec)
    prior = prior.resolve(dataset)
    X = design_matrix(dataset.locations, spec.trend)
    if dataset.H is not None:
        X = dataset.H @ X
    z = dataset.values
    m, p = X.shape
    beta, *_ = np.linalg.lstsq(X, z, rcond=None)
    residual = z - X @ beta
    if m > p:
        s2 = float(residual @ residual) / (m - p)
    else:
        s2 = float(np.var(z)) if m > 1 else 0.0
    if not s2 > 0:
        s2 = max(float(np.mean(z * z)), 1.0)
    try:
        beta_se = np.sqrt(np.diag(s2 * np.linalg.inv(X.T @ X)))
    except np.linalg.LinAlgError:
        beta_se = np.full(p, math.sqrt(s2))
    beta_se = np.where(np.isfinite(beta_se) & (beta_se > 0), beta_se, math.sqrt(s2))

    means, sds = [], []
    for entry in layout.entries:
        name = entry.name
        if name.startswith("beta"):
            k = 0 if name == "beta" else int(name.split("_")[1])
            means.append(beta[k])
            sds.append(10.0 * beta_se[k])
        elif name == "sigma2":
            means.append(math.log(s2))
            sds.append(3.0)
        elif name.startswith("scale"):
            means.append(math.log(prior.domain_size / 2.0))
            sds.append(2.0)
        elif name in ("tau", "angle"):
            means.append(0.0)
            sds.append(2.5)
        elif name == "kappa":
            means.append(math.log(prior.smooth_mode))
            sds.append(1.0)
    means = np.array(means)
    factor = np.diag(np.array(sds))
    logger.debug(f"initial approximation: means={np.round(means, 4).tolist()} sds={sds}")
    return NormalMixture(means=means[None, :], factors=factor[None, :, :], weights=np.ones(1))


def _safe_log_post(log_post_fn: LogPosterior) -> LogPosterior:
    """Map evaluation failures at pathological theta to a zero weight"""

    def evaluate(theta: np.ndarray) -> float:
        try:
            value = float(log_post_fn(theta))
        except (KrigError, ValueError, FloatingPointError, np.linalg.LinAlgError) as e:
            logger.debug(f"posterior evaluation failed at {np.round(theta, 4).tolist()}: {e}")
            return -math.inf
        return value if not math.isnan(value) else -math.inf

    return evaluate


def iterate_once(
    mix_prev: NormalMixture,
    log_post_fn: LogPosterior,
    n: int,
    rng: np.random.Generator,
    config: Optional[RunConfig] = None,
    k: int = 1,
    workers: Optional[int] = None,
) -> Tuple[NormalMixture, IterationDiagnostics]:
    config = config or RunConfig()
    p = mix_prev.dimension
    if n < 2 * (p + 1):
        raise ParameterError(f"sample size {n} is below 2(p+1) = {2 * (p + 1)}")
    started = time.perf_counter()

    # step 1: the only RNG use, sequential
    points = mixture_sample(mix_prev, n, rng)

    # step 2: pure evaluations, parallel over points
    evaluate = _safe_log_post(log_post_fn)
    log_post = np.array(parallel_map(evaluate, list(points), workers))
    log_prop = mixture_log_density(mix_prev, points, workers)
    failed = int(np.count_nonzero(~np.isfinite(log_post)))
    sample = WeightedSample.from_log_densities(points, log_post, log_prop)

    # step 3: tuning and the new mixture
    tuning = select_tuning(
        sample.points,
        sample.w,
        sample.v,
        threshold_r=config.threshold_r,
        h_bounds=config.h_bounds,
        h_tolerance=config.h_tolerance,
        h_max_iter=config.h_max_iter,
        workers=workers,
    )
    mixture = NormalMixture.from_covariances(sample.points, tuning.covariances, sample.w)

    diagnostics = IterationDiagnostics(
        k=k,
        n=n,
        gamma=sample.gamma,
        d_l1=l1_distance(sample.w),
        r_star=tuning.r_star,
        h_star=tuning.h_star,
        zero_weight_count=failed,
        wallclock=time.perf_counter() - started,
    )
    return mixture, diagnostics


def run(
    config: RunConfig,
    spec: ModelSpec,
    dataset: Dataset,
    prior: PriorSpec,
    workers: Optional[int] = None,
    on_iteration: Optional[Callable[[int, NormalMixture, Optional[IterationDiagnostics]], None]] = None,
) -> Tuple[NormalMixture, List[IterationDiagnostics]]:
    """
    Run up to k_max iterations from the diffuse start; stop early once gamma >= gamma_stop.

    `on_iteration(k, mixture, diagnostics)` is called with k = 0 and no
    diagnostics for the initial approximation, then after every iteration.
    """
    layout = ParameterLayout.from_model(spec)
    log_post_fn = posterior_log_density(spec, dataset, prior, layout)
    mixture = init_approximation(spec, dataset, prior)
    rng = np.random.default_rng(config.seed)
    history: List[IterationDiagnostics] = []
    logger.info(
        f"fitting {layout.size} parameters ({', '.join(layout.names)}) "
        f"to {dataset.m} data, k_max={config.k_max}, n0={config.n0}"
    )
    if on_iteration is not None:
        on_iteration(0, mixture, None)

    for k in range(1, config.k_max + 1):
        n = config.sample_size(k, layout.size)
        try:
            mixture, diagnostics = iterate_once(
                mixture, log_post_fn, n, rng, config=config, k=k, workers=workers
            )
        except (KrigError, ValueError) as e:
            raise EngineError(str(e), k) from e
        history.append(diagnostics)
        logger.info(
            f"iteration {k}: n={n} gamma={diagnostics.gamma:.3f} d_L1={diagnostics.d_l1:.3f} "
            f"r*={diagnostics.r_star:g} h*={diagnostics.h_star:.4g} "
            f"failed={diagnostics.zero_weight_count} ({diagnostics.wallclock:.1f}s)"
        )
        if on_iteration is not None:
            on_iteration(k, mixture, diagnostics)
        if config.gamma_stop is not None and diagnostics.gamma >= config.gamma_stop:
            logger.info(f"gamma {diagnostics.gamma:.3f} >= {config.gamma_stop}; stopping after iteration {k}")
            break
    return mixture, history
