"""
Posterior predictive ensembles and their point-wise summaries
"""
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator

from ..core.errors import KrigError, ParameterError, SimulationError
from ..core.parallel import parallel_map
from ..model.types import Dataset, ModelSpec, NaturalParams
from ..sampling.mixture import NormalMixture, mixture_sample
from ..sampling.priors import ParameterLayout, from_working
from .conditional import BLOCK_SIZE, MAX_NEIGHBORS, GridLike, conditional_simulate
from .transforms import ValueTransform

MAX_RETRIES = 3


class Ensemble(BaseModel):
    """s realizations over G cells and the parameter draws behind them"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    realizations: np.ndarray
    theta_draws: List[NaturalParams]
    theta_working: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def _check(self):
        if self.realizations.ndim != 2 or self.realizations.shape[0] < 1:
            raise ValueError(f"realizations must be s x G with s >= 1, got {self.realizations.shape}")
        if len(self.theta_draws) != self.realizations.shape[0]:
            raise ValueError(
                f"{len(self.theta_draws)} parameter draws for {self.realizations.shape[0]} realizations"
            )
        if not np.all(np.isfinite(self.realizations)):
            raise ValueError("realizations must be finite")
        return self

    @property
    def s(self) -> int:
        return self.realizations.shape[0]

    @property
    def cells(self) -> int:
        return self.realizations.shape[1]


def posterior_predictive(
    mix: NormalMixture,
    data: Dataset,
    grid: GridLike,
    s: int,
    rng: np.random.Generator,
    spec: Optional[ModelSpec] = None,
    back_transform: Optional[ValueTransform] = None,
    predict_smooth_only: bool = False,
    block_size: int = BLOCK_SIZE,
    max_neighbors: int = MAX_NEIGHBORS,
    workers: Optional[int] = None,
) -> Ensemble:
    """
    Draw theta from the mixture and one conditional realization per draw.

    The s parameter draws and a base seed come from `rng` up front; draw i then
    uses its own stream seeded by (base, i), so the ensemble does not depend
    on the worker count. A failed draw is retried with a fresh theta from its
    own stream, at most MAX_RETRIES times.
    """
    if s < 1:
        raise ParameterError(f"s must be >= 1, got {s}")
    spec = spec or ModelSpec(dimension=data.d)
    layout = ParameterLayout.from_model(spec)
    if layout.size != mix.dimension:
        raise ParameterError(
            f"mixture has dimension {mix.dimension}, model has {layout.size} free parameters"
        )
    back_transform = back_transform or ValueTransform()
    thetas = mixture_sample(mix, s, rng)
    base = int(rng.integers(2**63 - 1))

    def realize(index: int) -> Tuple[np.ndarray, np.ndarray, NaturalParams]:
        draw_rng = np.random.default_rng(np.random.SeedSequence([base, index]))
        theta_work = thetas[index]
        last_error: Optional[Exception] = None
        for attempt in range(MAX_RETRIES + 1):
            if attempt:
                theta_work = mixture_sample(mix, 1, draw_rng)[0]
            try:
                theta = from_working(theta_work, layout)
                field = conditional_simulate(
                    theta,
                    data,
                    grid,
                    draw_rng,
                    trend=spec.trend,
                    predict_smooth_only=predict_smooth_only,
                    block_size=block_size,
                    max_neighbors=max_neighbors,
                )
                return field, theta_work, theta
            except (KrigError, ValueError) as e:
                last_error = e
                logger.warning(f"draw {index}, attempt {attempt + 1}: {e}")
        raise SimulationError(f"failed after {MAX_RETRIES} retries: {last_error}", draw=index)

    results = parallel_map(realize, range(s), workers)
    realizations = back_transform.back(np.vstack([field for field, _, _ in results]))
    logger.info(f"simulated {s} realizations over {realizations.shape[1]} cells")
    return Ensemble(
        realizations=realizations,
        theta_draws=[theta for _, _, theta in results],
        theta_working=np.vstack([w for _, w, _ in results]),
    )


def summarize_ensemble(ens: Ensemble) -> Tuple[np.ndarray, np.ndarray]:
    """Point-wise median and sample standard deviation (divisor s - 1)"""
    if ens.s < 2:
        raise ParameterError(f"a standard deviation map needs at least 2 realizations, got {ens.s}")
    return np.median(ens.realizations, axis=0), np.std(ens.realizations, axis=0, ddof=1)
