"""
Value transforms between observed variables and the Gaussian field

`forward` maps raw observations onto the modelled scale before fitting;
`back` maps simulated values onto the observed scale.
"""
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.special import expit, logit

from ..core.errors import ParameterError


class ValueTransform(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["none", "log", "logit"] = "none"
    lower: float = 0.0
    upper: float = 1.0

    @model_validator(mode="after")
    def _bounds(self):
        if self.kind == "logit" and not self.lower < self.upper:
            raise ValueError(f"logit bounds must satisfy lower < upper, got ({self.lower}, {self.upper})")
        return self

    def forward(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if self.kind == "none":
            return values
        if self.kind == "log":
            if np.any(values <= 0):
                raise ParameterError("log transform needs strictly positive values")
            return np.log(values)
        if np.any(values <= self.lower) or np.any(values >= self.upper):
            raise ParameterError(
                f"logit transform needs values strictly inside ({self.lower}, {self.upper})"
            )
        return logit((values - self.lower) / (self.upper - self.lower))

    def back(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if self.kind == "none":
            return values
        if self.kind == "log":
            return np.exp(values)
        return self.lower + (self.upper - self.lower) * expit(values)
