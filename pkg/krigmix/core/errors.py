"""
Exception hierarchy
"""
from typing import Any, Optional, Tuple


class KrigError(Exception):
    """Base error for krigmix"""
    pass


class ParameterError(KrigError, ValueError):
    """Invalid parameter value or inconsistent shapes"""
    pass


class FactorizationError(KrigError):
    """A covariance or correlation matrix could not be factorized"""

    def __init__(
        self,
        message: str,
        theta: Any = None,
        pair: Optional[Tuple[int, int]] = None,
    ):
        super().__init__(message)
        self.theta = theta
        self.pair = pair


class RankError(KrigError):
    """Aggregation matrix H is not of full row rank"""
    pass


class DegenerateSampleError(KrigError):
    """Weighted sample cannot support the requested estimate"""
    pass


class EngineError(KrigError):
    """Failure inside one iteration of the posterior approximation"""

    def __init__(self, message: str, k: int):
        super().__init__(f"iteration {k}: {message}")
        self.k = k


class SimulationError(KrigError):
    """Conditional simulation failed"""

    def __init__(self, message: str, draw: Optional[int] = None):
        if draw is not None:
            message = f"draw {draw}: {message}"
        super().__init__(message)
        self.draw = draw


class DataFormatError(KrigError):
    """Malformed input file"""

    def __init__(self, message: str, path: Any = None, line: Optional[int] = None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.path = path
        self.line = line


class ConfigError(KrigError):
    """Invalid run configuration"""
    pass
