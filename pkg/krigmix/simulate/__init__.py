"""
Conditional simulation on prediction grids and ensemble summaries
"""
from .conditional import conditional_moments, conditional_simulate, gaussian_draw
from .ensemble import Ensemble, posterior_predictive, summarize_ensemble
from .grid import PredictionGrid, cell_centers
from .transforms import ValueTransform

__all__ = [
    "PredictionGrid",
    "cell_centers",
    "ValueTransform",
    "conditional_moments",
    "conditional_simulate",
    "gaussian_draw",
    "Ensemble",
    "posterior_predictive",
    "summarize_ensemble",
]
