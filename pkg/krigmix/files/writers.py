"""
CSV writers for fit and simulation outputs

All files are UTF-8 with '\n' line endings; floats use 17 significant digits
so identical runs give byte-identical files.
"""
import csv
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from ..sampling.engine import IterationDiagnostics
from ..sampling.priors import ParameterLayout
from ..simulate.grid import PredictionGrid

PathLike = Union[str, Path]
FLOAT = "%.17g"
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


def _float(value: float) -> str:
    return FLOAT % value


def _writer(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    handle = open(path, "w", newline="", encoding="utf-8")
    return handle, csv.writer(handle, lineterminator="\n")


def write_diagnostics(path: PathLike, history: Sequence[IterationDiagnostics]) -> Path:
    """k, n, gamma, d_l1, r_star, h_star, zero_weight_count; wallclock is logged only"""
    path = Path(path)
    handle, writer = _writer(path)
    with handle:
        writer.writerow(["k", "n", "gamma", "d_l1", "r_star", "h_star", "zero_weight_count"])
        for entry in history:
            writer.writerow(
                [
                    entry.k,
                    entry.n,
                    _float(entry.gamma),
                    _float(entry.d_l1),
                    _float(entry.r_star),
                    _float(entry.h_star),
                    entry.zero_weight_count,
                ]
            )
    return path


def write_samples(path: PathLike, names: Sequence[str], samples: np.ndarray) -> Path:
    path = Path(path)
    handle, writer = _writer(path)
    with handle:
        writer.writerow(list(names))
        for row in np.atleast_2d(samples):
            writer.writerow([_float(v) for v in row])
    return path


def write_summary(path: PathLike, layout: ParameterLayout, natural: np.ndarray) -> Path:
    """Per-parameter transform, empirical mean and sd on the natural scale"""
    path = Path(path)
    natural = np.atleast_2d(natural)
    ddof = 1 if natural.shape[0] > 1 else 0
    handle, writer = _writer(path)
    with handle:
        writer.writerow(["parameter", "transform", "mean", "sd"])
        for k, entry in enumerate(layout.entries):
            column = natural[:, k]
            writer.writerow(
                [
                    entry.name,
                    entry.transform,
                    _float(float(np.mean(column))),
                    _float(float(np.std(column, ddof=ddof))),
                ]
            )
        for name, value in sorted(layout.fixed.items()):
            writer.writerow([name, "fixed", _float(value), _float(0.0)])
    return path


def marginal_quantiles(k: int, names: Sequence[str], natural: np.ndarray) -> List[Dict]:
    """Rows of the per-iteration marginal table for one approximation"""
    levels = np.quantile(np.atleast_2d(natural), QUANTILES, axis=0)
    rows = []
    for j, name in enumerate(names):
        row = {"k": k, "parameter": name}
        for i, q in enumerate(QUANTILES):
            row[f"q{round(q * 100):02d}"] = float(levels[i, j])
        rows.append(row)
    return rows


def write_marginals(path: PathLike, rows: Sequence[Dict]) -> Path:
    path = Path(path)
    columns = ["k", "parameter"] + [f"q{round(q * 100):02d}" for q in QUANTILES]
    handle, writer = _writer(path)
    with handle:
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row["k"], row["parameter"]] + [_float(row[c]) for c in columns[2:]])
    return path


def write_grid(path: PathLike, grid: PredictionGrid, values: np.ndarray) -> Path:
    """One map: header line, then the row-major values, one line per run of the last axis"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.asarray(values, dtype=float).reshape(-1, grid.counts[-1])
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(grid.header() + "\n")
        np.savetxt(handle, table, fmt=FLOAT, delimiter=",", newline="\n")
    return path


def write_ensemble(path: PathLike, grid: PredictionGrid, realizations: np.ndarray) -> Path:
    """Header line, then one line of G row-major values per realization"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(grid.header() + "\n")
        np.savetxt(handle, np.atleast_2d(realizations), fmt=FLOAT, delimiter=",", newline="\n")
    return path


def read_grid(path: PathLike) -> np.ndarray:
    """Values of a map or ensemble file written above, header skipped"""
    return np.loadtxt(Path(path), delimiter=",", comments="#", ndmin=2)


def write_observations(path: PathLike, locations: np.ndarray, values: np.ndarray) -> Path:
    """Observation file readable by load_observations"""
    path = Path(path)
    locations = np.atleast_2d(np.asarray(locations, dtype=float))
    d = locations.shape[1]
    names = ["x"] if d == 1 else [f"x{k + 1}" for k in range(d)]
    handle, writer = _writer(path)
    with handle:
        writer.writerow(names + ["value"])
        for point, value in zip(locations, np.asarray(values, dtype=float)):
            writer.writerow([_float(c) for c in point] + [_float(value)])
    return path
