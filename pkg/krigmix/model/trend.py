"""
Trend design matrix
"""
import numpy as np

from ..core.errors import ParameterError
from .types import TrendSpec


def design_matrix(locations, trend: TrendSpec) -> np.ndarray:
    """Row i is mu(x_i): ones, ones plus coordinates, or the custom basis"""
    locations = np.atleast_2d(np.asarray(locations, dtype=float))
    n = locations.shape[0]
    if trend.kind == "constant":
        return np.ones((n, 1))
    if trend.kind == "linear":
        if locations.shape[1] != trend.dimension:
            raise ParameterError(
                f"linear trend expects {trend.dimension}-D locations, got {locations.shape[1]}-D"
            )
        return np.hstack([np.ones((n, 1)), locations])
    columns = [[float(f(x)) for x in locations] for f in trend.basis]
    return np.array(columns, dtype=float).T.reshape(n, len(trend.basis))
