"""
Synthetic datasets drawn from a known parameter vector
"""
from typing import Optional

import numpy as np
from loguru import logger

from .model.types import Dataset, NaturalParams, TrendSpec
from .simulate.conditional import conditional_simulate


def random_locations(n: int, d: int, domain_size: float, rng: np.random.Generator) -> np.ndarray:
    """n points uniform on [0, domain_size]^d"""
    return rng.uniform(0.0, domain_size, size=(n, d))


def synthesize(
    theta: NaturalParams,
    n: int,
    d: int,
    rng: np.random.Generator,
    domain_size: float = 1.0,
    trend: Optional[TrendSpec] = None,
    locations: Optional[np.ndarray] = None,
) -> Dataset:
    """Point observations of one unconditional realization of Y (nugget included)"""
    trend = trend or TrendSpec(dimension=d)
    if locations is None:
        locations = random_locations(n, d, domain_size, rng)
    empty = Dataset(locations=np.empty((0, d)), values=np.empty(0))
    values = conditional_simulate(theta, empty, locations, rng, trend=trend)
    logger.info(f"synthesized {locations.shape[0]} observations in {d}-D from {theta}")
    return Dataset(locations=locations, values=values)
