"""
Prior density and natural <-> working parameter transforms

The sampler works with every component on the whole real line: beta as is,
sigma2 / scales / kappa through log, tau and the angle through a scaled logit.
"""
import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy import stats
from scipy.special import expit, log_expit

from ..core.errors import ParameterError
from ..model.types import CorrelationParams, Dataset, ModelSpec, NaturalParams

WORKING_CLIP = 700.0

Transform = Literal["identity", "log", "logit"]


def gamma_from_mode_variance(mode: float, variance: float) -> Tuple[float, float]:
    """
    Gamma (shape, scale) with the given mode and variance.

    (shape - 1) scale = mode and shape scale^2 = variance reduce to
    variance k^2 - (2 variance + mode^2) k + variance = 0; the roots multiply
    to 1 so the larger one is the unique solution with shape > 1.
    """
    if not (mode > 0 and variance > 0):
        raise ParameterError(
            f"mode and variance must be positive (got mode={mode}, variance={variance})"
        )
    b = 2.0 * variance + mode * mode
    disc = b * b - 4.0 * variance * variance
    shape = (b + math.sqrt(disc)) / (2.0 * variance)
    if not shape > 1.0:
        raise ParameterError(f"no gamma distribution with shape > 1 has mode {mode}")
    return shape, mode / (shape - 1.0)


class PriorSpec(BaseModel):
    """Hyperparameters of the independent-components prior"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    nugget_beta: Tuple[float, float] = (1.0, 5.0)
    scale_shape: float = 1.0
    # None means L / (2 log 2): exponential prior with median L / 2
    scale_scale: Optional[float] = None
    smooth_mode: float = 1.5
    smooth_variance: float = 4.0
    # L, the size of the model domain; None means the bounding-box max side
    domain_size: Optional[float] = None

    @field_validator("nugget_beta")
    @classmethod
    def _beta_positive(cls, value):
        if not all(v > 0 for v in value):
            raise ValueError(f"nugget beta parameters must be positive, got {value}")
        return value

    @field_validator("scale_shape", "smooth_mode", "smooth_variance")
    @classmethod
    def _positive(cls, value):
        if not value > 0:
            raise ValueError(f"must be positive, got {value}")
        return value

    @field_validator("scale_scale", "domain_size")
    @classmethod
    def _positive_optional(cls, value):
        if value is not None and not value > 0:
            raise ValueError(f"must be positive, got {value}")
        return value

    def resolve(self, dataset: Optional[Dataset] = None) -> "PriorSpec":
        """Fill L (from the data bounding box) and the scale-prior scale"""
        size = self.domain_size
        if size is None:
            size = dataset.domain_size() if dataset is not None else 1.0
        scale = self.scale_scale
        if scale is None:
            scale = size / (2.0 * math.log(2.0))
        return self.model_copy(update={"domain_size": size, "scale_scale": scale})

    @property
    def smooth_gamma(self) -> Tuple[float, float]:
        return gamma_from_mode_variance(self.smooth_mode, self.smooth_variance)


class ParameterEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    transform: Transform
    lower: float = 0.0
    upper: float = 1.0


class ParameterLayout(BaseModel):
    """Ordered free parameters with their transforms, plus the fixed values"""
    model_config = ConfigDict(frozen=True)

    entries: Tuple[ParameterEntry, ...]
    trend_size: int
    dimension: int
    anisotropic: bool
    fixed: Dict[str, float] = {}

    @model_validator(mode="after")
    def _unique(self):
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in layout: {names}")
        return self

    @classmethod
    def from_model(cls, spec: ModelSpec) -> "ParameterLayout":
        """Canonical order: beta..., angle, scales..., sigma2, tau, kappa"""
        p = spec.trend.p
        entries: List[ParameterEntry] = []
        if p == 1:
            entries.append(ParameterEntry(name="beta", transform="identity"))
        else:
            entries.extend(
                ParameterEntry(name=f"beta_{k}", transform="identity") for k in range(p)
            )
        if spec.anisotropic and "angle" not in spec.fixed:
            entries.append(
                ParameterEntry(name="angle", transform="logit", lower=0.0, upper=math.pi / 2)
            )
        if spec.scale_count == 1:
            entries.append(ParameterEntry(name="scale", transform="log"))
        else:
            entries.extend(
                ParameterEntry(name=f"scale_{k + 1}", transform="log")
                for k in range(spec.scale_count)
            )
        entries.append(ParameterEntry(name="sigma2", transform="log"))
        if "tau" not in spec.fixed:
            entries.append(ParameterEntry(name="tau", transform="logit", lower=0.0, upper=1.0))
        if "kappa" not in spec.fixed:
            entries.append(ParameterEntry(name="kappa", transform="log"))
        return cls(
            entries=tuple(entries),
            trend_size=p,
            dimension=spec.dimension,
            anisotropic=spec.anisotropic,
            fixed=dict(spec.fixed),
        )

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def names(self) -> List[str]:
        return [e.name for e in self.entries]

    def index(self, name: str) -> int:
        return self.names.index(name)


def _natural_values(theta: NaturalParams, layout: ParameterLayout) -> Dict[str, float]:
    values: Dict[str, float] = {}
    if layout.trend_size == 1:
        values["beta"] = theta.beta[0]
    else:
        for k, b in enumerate(theta.beta):
            values[f"beta_{k}"] = b
    scales = theta.corr.scales
    if len(scales) == 1:
        values["scale"] = scales[0]
    else:
        for k, s in enumerate(scales):
            values[f"scale_{k + 1}"] = s
    if theta.corr.angle is not None:
        values["angle"] = theta.corr.angle
    values["sigma2"] = theta.sigma2
    values["tau"] = theta.tau
    values["kappa"] = theta.corr.kappa
    return values


def natural_vector(theta: NaturalParams, layout: ParameterLayout) -> np.ndarray:
    """Free natural-scale values in layout order"""
    values = _natural_values(theta, layout)
    return np.array([values[e.name] for e in layout.entries], dtype=float)


def _forward(entry: ParameterEntry, x: float) -> float:
    if entry.transform == "identity":
        return float(x)
    if entry.transform == "log":
        if not x > 0:
            raise ParameterError(f"{entry.name}={x} is on the boundary of (0, inf)")
        return math.log(x)
    if not entry.lower < x < entry.upper:
        raise ParameterError(
            f"{entry.name}={x} is on the boundary of ({entry.lower}, {entry.upper})"
        )
    return math.log((x - entry.lower) / (entry.upper - x))


def _inverse(entry: ParameterEntry, w: float) -> float:
    if entry.transform == "identity":
        return float(w)
    if entry.transform == "log":
        return math.exp(min(max(w, -WORKING_CLIP), WORKING_CLIP))
    x = entry.lower + (entry.upper - entry.lower) * float(expit(w))
    # keep the value strictly inside the open interval
    if x <= entry.lower:
        x = float(np.nextafter(entry.lower, entry.upper))
    elif x >= entry.upper:
        x = float(np.nextafter(entry.upper, entry.lower))
    return x


def _log_jacobian(entry: ParameterEntry, w: float, x: float) -> float:
    """log |dx/dw| of the inverse transform"""
    if entry.transform == "identity":
        return 0.0
    if entry.transform == "log":
        return math.log(x)
    return (
        math.log(entry.upper - entry.lower)
        + float(log_expit(w))
        + float(log_expit(-w))
    )


def to_working(theta: NaturalParams, layout: ParameterLayout) -> np.ndarray:
    values = _natural_values(theta, layout)
    return np.array([_forward(e, values[e.name]) for e in layout.entries], dtype=float)


def from_working(theta_work, layout: ParameterLayout) -> NaturalParams:
    w = np.asarray(theta_work, dtype=float)
    if w.shape != (layout.size,):
        raise ParameterError(f"working vector has shape {w.shape}, layout needs ({layout.size},)")
    values = {e.name: _inverse(e, float(wk)) for e, wk in zip(layout.entries, w)}
    values.update(layout.fixed)

    if layout.trend_size == 1:
        beta = (values["beta"],)
    else:
        beta = tuple(values[f"beta_{k}"] for k in range(layout.trend_size))
    if layout.anisotropic:
        scales = (values["scale_1"], values["scale_2"])
        angle = values["angle"]
    else:
        scales = (values["scale"],)
        angle = None
    corr = CorrelationParams(kappa=values["kappa"], scales=scales, angle=angle)
    return NaturalParams(beta=beta, tau=values["tau"], sigma2=values["sigma2"], corr=corr)


def natural_samples(samples, layout: ParameterLayout) -> np.ndarray:
    """Working-scale draws (rows) mapped column by column onto the natural scale"""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] != layout.size:
        raise ParameterError(f"samples have {samples.shape[1]} columns, layout needs {layout.size}")
    return np.array(
        [[_inverse(entry, float(w)) for entry, w in zip(layout.entries, row)] for row in samples]
    ).reshape(samples.shape)


def log_prior_working(theta_work, layout: ParameterLayout, prior: PriorSpec) -> float:
    """
    log pi(natural(theta)) + log |Jacobian of from_working|.

    beta has a flat prior and sigma2 the 1/sigma2 prior, both improper; the
    proper components use normalized scipy densities.
    """
    w = np.asarray(theta_work, dtype=float)
    if prior.scale_scale is None:
        prior = prior.resolve()
    total = 0.0
    for entry, wk in zip(layout.entries, w):
        x = _inverse(entry, float(wk))
        total += _log_jacobian(entry, float(wk), x)
        name = entry.name
        if name.startswith("beta"):
            continue
        if name == "sigma2":
            total -= math.log(x)
        elif name == "tau":
            a, b = prior.nugget_beta
            total += float(stats.beta.logpdf(x, a, b))
        elif name.startswith("scale"):
            total += float(stats.gamma.logpdf(x, prior.scale_shape, scale=prior.scale_scale))
        elif name == "kappa":
            shape, scale = prior.smooth_gamma
            total += float(stats.gamma.logpdf(x, shape, scale=scale))
        elif name == "angle":
            total -= math.log(entry.upper - entry.lower)
    return total
