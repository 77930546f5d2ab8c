"""Homogeneous boundary conditions of the outer domain."""

import numpy as np

from ..._errors import GridError
from ...types import BoundaryVariable, FloatArray, Grid2D, Line, TimeGrid
from . import BoundaryProvider


class HomogeneousProvider(BoundaryProvider):
    """Zero on every inflow characteristic and every normal velocity."""

    def __init__(self, grid: Grid2D):
        self._grid = grid

    def provide(
        self, k: int, n: int, variable: BoundaryVariable, line: Line
    ) -> FloatArray:
        return np.zeros(self._grid.line_length(line))

    def check_compatible(self, grid: Grid2D, time: TimeGrid, n_max: int) -> None:
        if grid != self._grid:
            raise GridError("grid", "homogeneous provider was built for another grid")
