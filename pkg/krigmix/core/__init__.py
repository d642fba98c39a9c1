"""
Core Package
"""
from .config import settings
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateSampleError,
    EngineError,
    FactorizationError,
    KrigError,
    ParameterError,
    RankError,
    SimulationError,
)

__all__ = [
    "settings",
    "KrigError",
    "ParameterError",
    "FactorizationError",
    "RankError",
    "DegenerateSampleError",
    "EngineError",
    "SimulationError",
    "DataFormatError",
    "ConfigError",
]
