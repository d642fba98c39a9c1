"""
Regular prediction grid

Cells are addressed by an index tuple over `counts`; the flat order is
row-major (C order), so the first axis varies slowest. Cell k has center
origin + (index + 0.5) * cell_size.
"""
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class PredictionGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    origin: Tuple[float, ...]
    cell_size: Tuple[float, ...]
    counts: Tuple[int, ...]

    @field_validator("cell_size")
    @classmethod
    def _positive_cells(cls, value):
        if not all(c > 0 for c in value):
            raise ValueError(f"cell sizes must be positive, got {value}")
        return value

    @field_validator("counts")
    @classmethod
    def _positive_counts(cls, value):
        if not all(c >= 1 for c in value):
            raise ValueError(f"cell counts must be >= 1, got {value}")
        return value

    @model_validator(mode="after")
    def _same_dimension(self):
        d = len(self.origin)
        if not 1 <= d <= 3:
            raise ValueError(f"grid dimension must be 1, 2 or 3, got {d}")
        if len(self.cell_size) != d or len(self.counts) != d:
            raise ValueError(
                f"origin, cell_size and counts must all have length {d}"
            )
        return self

    @property
    def dimension(self) -> int:
        return len(self.origin)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    def header(self) -> str:
        """One-line description used as the first line of grid CSV files"""
        def join(values) -> str:
            return " ".join(f"{float(v):.17g}" for v in values)

        return (
            f"# origin={join(self.origin)} cell_size={join(self.cell_size)} "
            f"counts={' '.join(str(c) for c in self.counts)}"
        )


def cell_centers(grid: PredictionGrid) -> np.ndarray:
    """G x d array of cell centers in row-major order"""
    axes = [
        origin + (np.arange(count) + 0.5) * size
        for origin, size, count in zip(grid.origin, grid.cell_size, grid.counts)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel(order="C") for m in mesh], axis=1)
