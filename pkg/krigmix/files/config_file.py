"""
Run configuration file

Flat `section.key = value` lines; `#` starts a comment, comma-separated
values become lists. Every section is a pydantic model that rejects unknown
keys. Relative paths in the `io` section are resolved against the directory
of the configuration file.
"""
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from ..core.errors import ConfigError
from ..model.types import ModelSpec, TrendSpec
from ..sampling.engine import RunConfig
from ..sampling.priors import PriorSpec
from ..simulate.conditional import BLOCK_SIZE, MAX_NEIGHBORS
from ..simulate.grid import PredictionGrid
from ..simulate.transforms import ValueTransform

PathLike = Union[str, Path]


def _as_list(value):
    if isinstance(value, (str, int, float)):
        return [value]
    return value


class FixedSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kappa: Optional[float] = None
    tau: Optional[float] = None
    angle: Optional[float] = None

    def values(self) -> Dict[str, float]:
        return {name: value for name, value in self.model_dump().items() if value is not None}


class ModelSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int = 2
    trend: Literal["constant", "linear"] = "constant"
    anisotropic: bool = False
    fixed: FixedSection = FixedSection()
    data_transform: Literal["none", "log", "logit"] = "none"
    data_bounds: Tuple[float, float] = (0.0, 1.0)

    def spec(self) -> ModelSpec:
        trend = TrendSpec(kind=self.trend, dimension=self.dimension)
        return ModelSpec(
            dimension=self.dimension,
            trend=trend,
            anisotropic=self.anisotropic,
            fixed=self.fixed.values(),
        )

    def transform(self) -> ValueTransform:
        lower, upper = self.data_bounds
        return ValueTransform(kind=self.data_transform, lower=lower, upper=upper)


class GridSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    origin: Tuple[float, ...]
    cell_size: Tuple[float, ...]
    counts: Tuple[int, ...]

    @field_validator("origin", "cell_size", "counts", mode="before")
    @classmethod
    def _lists(cls, value):
        return _as_list(value)

    def grid(self) -> PredictionGrid:
        return PredictionGrid(origin=self.origin, cell_size=self.cell_size, counts=self.counts)


class SimulateSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid: Optional[GridSection] = None
    s: int = 100
    seed: int = 0
    back_transform: Literal["none", "log", "logit"] = "none"
    back_bounds: Tuple[float, float] = (0.0, 1.0)
    predict_smooth_only: bool = False
    block_size: int = BLOCK_SIZE
    max_neighbors: int = MAX_NEIGHBORS

    @field_validator("s", "block_size", "max_neighbors")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    def transform(self) -> ValueTransform:
        lower, upper = self.back_bounds
        return ValueTransform(kind=self.back_transform, lower=lower, upper=upper)


class IoSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    observations: Optional[Path] = None
    # linear data: the observation file holds the m data, support the n locations of y
    support: Optional[Path] = None
    h_matrix: Optional[Path] = None
    output_dir: Path = Path("output")
    mixture: Optional[Path] = None

    @model_validator(mode="after")
    def _linear_data(self):
        if (self.h_matrix is None) != (self.support is None):
            raise ValueError("io.h_matrix and io.support must be given together")
        return self

    def resolved(self, base: Path) -> "IoSection":
        updates = {}
        for name in ("observations", "support", "h_matrix", "output_dir", "mixture"):
            value = getattr(self, name)
            if value is not None and not value.is_absolute():
                updates[name] = base / value
        return self.model_copy(update=updates)

    @property
    def mixture_path(self) -> Path:
        return self.mixture if self.mixture is not None else self.output_dir / "mixture.txt"


class ConfigFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: ModelSection = ModelSection()
    prior: PriorSpec = PriorSpec()
    run: RunConfig = RunConfig()
    simulate: SimulateSection = SimulateSection()
    io: IoSection = IoSection()

    @field_validator("prior", mode="before")
    @classmethod
    def _prior_pairs(cls, value):
        if isinstance(value, dict) and "nugget_beta" in value:
            value = {**value, "nugget_beta": _as_list(value["nugget_beta"])}
        return value


def parse_config(text: str, source: str = "<config>") -> Dict[str, Any]:
    """Nested dictionary from `a.b.c = value` lines"""
    tree: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected 'section.key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        path = key.split(".")
        if len(path) < 2 or not all(path):
            raise ConfigError(f"{source}:{number}: key {key!r} needs a section prefix")
        parsed: Union[str, List[str]] = value
        if "," in value:
            parsed = [item.strip() for item in value.split(",")]
        node = tree
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"{source}:{number}: {key!r} conflicts with an earlier value")
            node = child
        if path[-1] in node:
            raise ConfigError(f"{source}:{number}: duplicate key {key!r}")
        node[path[-1]] = parsed
    return tree


def load_config(path: PathLike) -> ConfigFile:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    config = ConfigFile.model_validate(parse_config(path.read_text(encoding="utf-8"), str(path)))
    return config.model_copy(update={"io": config.io.resolved(path.parent)})
