"""
Spatial model domain types
"""
import math
from typing import Callable, Dict, Literal, Optional, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..core.errors import RankError

FIXABLE_PARAMETERS = ("kappa", "tau", "angle")


def _as_float_array(value, ndim: int, name: str) -> np.ndarray:
    array = np.array(value, dtype=float)
    if ndim == 2 and array.ndim == 1:
        array = array.reshape(-1, 1)
    if array.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError(f"{name} must contain only finite numbers")
    array.setflags(write=False)
    return array


def check_full_row_rank(H: np.ndarray) -> int:
    """Verify H (m x n) has rank m via a QR factorization of its transpose"""
    m, n = H.shape
    if m == 0 or m > n:
        raise RankError(f"H must be m x n with 1 <= m <= n (got {m} x {n})")
    r = scipy.linalg.qr(H.T, mode="r")[0]
    diag = np.abs(np.diag(r))
    tol = max(H.shape) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < m:
        raise RankError(
            f"H must be an m x n matrix of rank m; got {m} rows but rank {rank}"
        )
    return rank


class TrendSpec(BaseModel):
    """Deterministic covariates mu(x) of the trend"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["constant", "linear", "custom"] = "constant"
    dimension: int = 1
    basis: Tuple[Callable[[np.ndarray], float], ...] = ()

    @model_validator(mode="after")
    def _check_basis(self):
        if self.kind == "custom" and not self.basis:
            raise ValueError("custom trend needs at least one basis function")
        if self.kind != "custom" and self.basis:
            raise ValueError(f"{self.kind} trend takes no basis functions")
        if self.dimension < 1:
            raise ValueError("trend dimension must be >= 1")
        return self

    @property
    def p(self) -> int:
        if self.kind == "constant":
            return 1
        if self.kind == "linear":
            return self.dimension + 1
        return len(self.basis)


class CorrelationParams(BaseModel):
    """Matern smoothness, per-axis scales and optional 2-D rotation angle"""
    model_config = ConfigDict(frozen=True)

    kappa: float
    scales: Tuple[float, ...]
    angle: Optional[float] = None

    @field_validator("kappa")
    @classmethod
    def _positive_kappa(cls, value: float) -> float:
        if not value > 0:
            raise ValueError(f"kappa must be > 0, got {value}")
        return value

    @field_validator("scales")
    @classmethod
    def _positive_scales(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if not value:
            raise ValueError("at least one scale is required")
        if not all(s > 0 and math.isfinite(s) for s in value):
            raise ValueError(f"scales must be positive and finite, got {value}")
        return value

    @field_validator("angle")
    @classmethod
    def _angle_range(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not 0.0 < value < math.pi / 2:
            raise ValueError(f"angle must lie in (0, pi/2), got {value}")
        return value

    @model_validator(mode="after")
    def _angle_needs_two_scales(self):
        if self.angle is not None and len(self.scales) != 2:
            raise ValueError("a rotation angle is only defined for two scales (2-D)")
        return self


class NaturalParams(BaseModel):
    """theta on its natural scale: trend, nugget fraction, variance, correlation"""
    model_config = ConfigDict(frozen=True)

    beta: Tuple[float, ...]
    tau: float
    sigma2: float
    corr: CorrelationParams

    @field_validator("tau")
    @classmethod
    def _nugget_range(cls, value: float) -> float:
        if not 0.0 <= value < 1.0:
            raise ValueError(f"tau must lie in [0, 1), got {value}")
        return value

    @field_validator("sigma2")
    @classmethod
    def _positive_variance(cls, value: float) -> float:
        if not (value > 0 and math.isfinite(value)):
            raise ValueError(f"sigma2 must be positive and finite, got {value}")
        return value


class Dataset(BaseModel):
    """Observation locations, values and the optional aggregation matrix H"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    locations: np.ndarray
    values: np.ndarray
    H: Optional[np.ndarray] = None

    @field_validator("locations", mode="before")
    @classmethod
    def _locations(cls, value):
        return _as_float_array(value, 2, "locations")

    @field_validator("values", mode="before")
    @classmethod
    def _values(cls, value):
        return _as_float_array(value, 1, "values")

    @field_validator("H", mode="before")
    @classmethod
    def _aggregation(cls, value):
        if value is None:
            return None
        return _as_float_array(value, 2, "H")

    @model_validator(mode="after")
    def _shapes(self):
        n = self.locations.shape[0]
        if self.H is None:
            if self.values.shape[0] != n:
                raise ValueError(
                    f"{self.values.shape[0]} values for {n} locations"
                )
        else:
            if self.H.shape != (self.values.shape[0], n):
                raise ValueError(
                    f"H has shape {self.H.shape}, expected ({self.values.shape[0]}, {n})"
                )
            check_full_row_rank(self.H)
        return self

    @property
    def n(self) -> int:
        return self.locations.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.locations.shape[1]

    def domain_size(self) -> float:
        """Maximum side length of the bounding box of the locations"""
        if self.n == 0:
            return 1.0
        extent = self.locations.max(axis=0) - self.locations.min(axis=0)
        size = float(extent.max())
        return size if size > 0 else 1.0


class ModelSpec(BaseModel):
    """Spatial dimension, trend, anisotropy and fixed parameters"""
    model_config = ConfigDict(frozen=True)

    dimension: int = 2
    trend: TrendSpec = TrendSpec()
    anisotropic: bool = False
    fixed: Dict[str, float] = {}

    @model_validator(mode="after")
    def _consistent(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if self.anisotropic and self.dimension != 2:
            raise ValueError("anisotropy is supported in 2-D only")
        if self.trend.kind == "linear" and self.trend.dimension != self.dimension:
            raise ValueError("linear trend dimension does not match the model dimension")
        unknown = set(self.fixed) - set(FIXABLE_PARAMETERS)
        if unknown:
            raise ValueError(f"cannot fix {sorted(unknown)}; fixable: {FIXABLE_PARAMETERS}")
        if "angle" in self.fixed and not self.anisotropic:
            raise ValueError("angle can only be fixed in an anisotropic model")
        return self

    @property
    def scale_count(self) -> int:
        return 2 if self.anisotropic else 1
