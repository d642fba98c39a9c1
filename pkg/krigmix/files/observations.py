"""
Observation and aggregation-matrix readers

Observation files: one header row, then d coordinate columns and one value
column per row. H files: one `row,col,weight` triplet per line, optional
header. Numbers are parsed with float(), independent of the locale.
"""
import csv
from collections import Counter
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from loguru import logger

from ..core.errors import DataFormatError, RankError
from ..model.types import Dataset, check_full_row_rank
from ..simulate.transforms import ValueTransform

PathLike = Union[str, Path]


def _rows(path: Path):
    """(line number, fields) for every non-blank, non-comment row"""
    with open(path, newline="", encoding="utf-8") as f:
        for number, fields in enumerate(csv.reader(f), start=1):
            if not fields or all(not field.strip() for field in fields):
                continue
            if fields[0].lstrip().startswith("#"):
                continue
            yield number, [field.strip() for field in fields]


def _number(text: str, path: Path, line: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataFormatError(f"{what} {text!r} is not a number", path=path, line=line) from None
    if not np.isfinite(value):
        raise DataFormatError(f"{what} {text!r} is not finite", path=path, line=line)
    return value


def load_observations(
    path: PathLike,
    d: int,
    transform: Optional[ValueTransform] = None,
) -> Dataset:
    """Dataset of point observations; values go through `transform.forward` when given"""
    path = Path(path)
    if not path.exists():
        raise DataFormatError("observation file not found", path=path)
    rows = _rows(path)
    header = next(rows, None)
    if header is None:
        raise DataFormatError("empty file; expected a header row", path=path)
    columns = d + 1
    if len(header[1]) != columns:
        raise DataFormatError(
            f"header has {len(header[1])} columns, expected {columns} ({d} coordinates and a value)",
            path=path,
            line=header[0],
        )

    locations: List[List[float]] = []
    values: List[float] = []
    for line, fields in rows:
        if len(fields) != columns:
            raise DataFormatError(f"expected {columns} columns, found {len(fields)}", path=path, line=line)
        locations.append([_number(f, path, line, "coordinate") for f in fields[:d]])
        values.append(_number(fields[d], path, line, "value"))
    if not values:
        raise DataFormatError("no observations", path=path)

    duplicates = [loc for loc, count in Counter(map(tuple, locations)).items() if count > 1]
    if duplicates:
        logger.warning(
            f"{path}: {len(duplicates)} locations observed more than once, e.g. {duplicates[0]}; "
            "only a positive nugget gives them a finite likelihood"
        )

    z = np.array(values)
    if transform is not None:
        try:
            z = transform.forward(z)
        except ValueError as e:
            raise DataFormatError(str(e), path=path) from e
    logger.info(f"loaded {len(values)} observations in {d}-D from {path}")
    return Dataset(locations=np.array(locations, dtype=float).reshape(-1, d), values=z)


def _load_columns(path: Path, columns: int, what: str) -> np.ndarray:
    if not path.exists():
        raise DataFormatError(f"{what} file not found", path=path)
    rows = _rows(path)
    header = next(rows, None)
    if header is None:
        raise DataFormatError("empty file; expected a header row", path=path)
    if len(header[1]) != columns:
        raise DataFormatError(f"header has {len(header[1])} columns, expected {columns}", path=path, line=header[0])
    table = []
    for line, fields in rows:
        if len(fields) != columns:
            raise DataFormatError(f"expected {columns} columns, found {len(fields)}", path=path, line=line)
        table.append([_number(f, path, line, what) for f in fields])
    if not table:
        raise DataFormatError(f"no {what} rows", path=path)
    return np.array(table, dtype=float).reshape(-1, columns)


def load_linear_data(
    values_path: PathLike,
    support_path: PathLike,
    h_path: PathLike,
    d: int,
    transform: Optional[ValueTransform] = None,
) -> Dataset:
    """
    Linear data z = H y: a one-column file of the m data, a d-column file of
    the n support locations of y and the H triplet file.
    """
    support = _load_columns(Path(support_path), d, "support coordinate")
    z = _load_columns(Path(values_path), 1, "datum")[:, 0]
    H = load_h_matrix(h_path, support.shape[0])
    if H.shape[0] != z.size:
        raise DataFormatError(f"H has {H.shape[0]} rows for {z.size} data", path=Path(h_path))
    if transform is not None:
        try:
            z = transform.forward(z)
        except ValueError as e:
            raise DataFormatError(str(e), path=Path(values_path)) from e
    logger.info(f"loaded {z.size} linear data over {support.shape[0]} support points")
    return Dataset(locations=support, values=z, H=H)


def load_h_matrix(path: PathLike, n: int) -> np.ndarray:
    """Dense m x n aggregation matrix from (row, col, weight) triplets; rank m is verified"""
    path = Path(path)
    if not path.exists():
        raise DataFormatError("H matrix file not found", path=path)
    triplets = []
    for line, fields in _rows(path):
        if len(fields) != 3:
            raise DataFormatError(f"expected row,col,weight, found {len(fields)} fields", path=path, line=line)
        try:
            row, col = int(fields[0]), int(fields[1])
        except ValueError:
            if not triplets:
                continue  # header
            raise DataFormatError(f"indices {fields[:2]} are not integers", path=path, line=line) from None
        if row < 0:
            raise DataFormatError(f"row index {row} is negative", path=path, line=line)
        if not 0 <= col < n:
            raise DataFormatError(f"column index {col} outside [0, {n})", path=path, line=line)
        triplets.append((row, col, _number(fields[2], path, line, "weight")))
    if not triplets:
        raise DataFormatError("no H entries", path=path)

    m = max(row for row, _, _ in triplets) + 1
    H = np.zeros((m, n))
    for row, col, weight in triplets:
        H[row, col] += weight
    try:
        check_full_row_rank(H)
    except RankError as e:
        raise RankError(f"{path}: {e}") from e
    return H
