"""
Plain-text mixture persistence

    # krigmix-mixture v1
    names <comma-separated parameter names>
    components <n> <p>
    weights        n lines
    means          n lines of p values
    factors        n * p lines of p values (lower factor rows, component by component)
    history <k>    k diagnostics rows
    end

Numbers are written with 17 significant digits so a reload is bit-identical.
"""
from pathlib import Path
from typing import Iterator, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..core.errors import DataFormatError
from ..sampling.engine import IterationDiagnostics
from ..sampling.mixture import NormalMixture

MAGIC = "# krigmix-mixture v1"
HISTORY_FIELDS = ("k", "n", "gamma", "d_l1", "r_star", "h_star", "zero_weight_count")

PathLike = Union[str, Path]


class SavedMixture(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    names: List[str]
    mixture: NormalMixture
    history: List[IterationDiagnostics] = []


def _fmt(values) -> str:
    return ",".join(f"{float(v):.17g}" for v in np.ravel(values))


def save_mixture(path: PathLike, saved: SavedMixture) -> Path:
    path = Path(path)
    mix = saved.mixture
    n, p = mix.size, mix.dimension
    if len(saved.names) != p:
        raise DataFormatError(f"{len(saved.names)} names for a {p}-dimensional mixture", path=path)
    lines = [MAGIC, f"names {','.join(saved.names)}", f"components {n} {p}", "weights"]
    lines.extend(f"{float(w):.17g}" for w in mix.weights)
    lines.append("means")
    lines.extend(_fmt(row) for row in mix.means)
    lines.append("factors")
    lines.extend(_fmt(row) for factor in mix.factors for row in factor)
    lines.append(f"history {len(saved.history)}")
    for entry in saved.history:
        lines.append(
            f"{entry.k},{entry.n},{entry.gamma:.17g},{entry.d_l1:.17g},"
            f"{entry.r_star:.17g},{entry.h_star:.17g},{entry.zero_weight_count}"
        )
    lines.append("end")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class _Reader:
    def __init__(self, path: Path):
        self.path = path
        self._lines: Iterator[Tuple[int, str]] = iter(
            enumerate(path.read_text(encoding="utf-8").splitlines(), start=1)
        )
        self.line = 0

    def next(self) -> str:
        try:
            self.line, text = next(self._lines)
        except StopIteration:
            raise DataFormatError("unexpected end of file", path=self.path, line=self.line + 1) from None
        return text.strip()

    def keyword(self, word: str) -> List[str]:
        parts = self.next().split()
        if not parts or parts[0] != word:
            raise self.error(f"expected '{word}'")
        return parts[1:]

    def numbers(self, count: int) -> np.ndarray:
        text = self.next()
        try:
            values = np.array([float(v) for v in text.split(",")])
        except ValueError:
            raise self.error(f"malformed numbers {text!r}") from None
        if values.size != count:
            raise self.error(f"expected {count} numbers, found {values.size}")
        return values

    def error(self, message: str) -> DataFormatError:
        return DataFormatError(message, path=self.path, line=self.line)


def load_mixture(path: PathLike) -> SavedMixture:
    path = Path(path)
    if not path.exists():
        raise DataFormatError("mixture file not found", path=path)
    reader = _Reader(path)
    if reader.next() != MAGIC:
        raise reader.error(f"not a mixture file (expected '{MAGIC}')")
    names_field = reader.keyword("names")
    names = names_field[0].split(",") if names_field else []
    sizes = reader.keyword("components")
    try:
        n, p = int(sizes[0]), int(sizes[1])
    except (IndexError, ValueError):
        raise reader.error("expected 'components <n> <p>'") from None
    if len(names) != p:
        raise reader.error(f"{len(names)} names for dimension {p}")

    reader.keyword("weights")
    weights = np.array([reader.numbers(1)[0] for _ in range(n)])
    reader.keyword("means")
    means = np.vstack([reader.numbers(p) for _ in range(n)]) if n else np.empty((0, p))
    reader.keyword("factors")
    factors = np.array([[reader.numbers(p) for _ in range(p)] for _ in range(n)])

    count_field = reader.keyword("history")
    try:
        count = int(count_field[0])
    except (IndexError, ValueError):
        raise reader.error("expected 'history <count>'") from None
    history = []
    for _ in range(count):
        k, size, gamma, d_l1, r_star, h_star, failed = reader.numbers(len(HISTORY_FIELDS))
        history.append(
            IterationDiagnostics(
                k=int(k),
                n=int(size),
                gamma=gamma,
                d_l1=d_l1,
                r_star=r_star,
                h_star=h_star,
                zero_weight_count=int(failed),
            )
        )
    reader.keyword("end")

    try:
        mixture = NormalMixture(means=means, factors=factors, weights=weights)
    except ValueError as e:
        raise DataFormatError(f"invalid mixture: {e}", path=path) from e
    return SavedMixture(names=names, mixture=mixture, history=history)
