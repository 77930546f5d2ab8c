"""Boundary traces recorded on an inner rectangle and replayed by a nested run."""

import logging
from dataclasses import dataclass, field

import numpy as np

from ..._errors import ConfigError, GridError, TraceMissingError
from ...types import (
    BoundaryVariable,
    FloatArray,
    Grid2D,
    InnerRect,
    Line,
    ModalState,
    ModeKind,
    TimeGrid,
)
from . import REGIME_KEYS, BoundaryProvider

logger = logging.getLogger(__name__)

TraceKey = tuple[int, int, BoundaryVariable, Line]


@dataclass(eq=False)
class TraceRecord:
    """Time-indexed edge values of every mode along an inner rectangle.

    ``kinds`` holds the regime of each mode n = 0..N_max; it fixes which
    (variable, line) pairs exist for that mode.
    """

    rect: InnerRect
    grid: Grid2D
    dt: float
    kinds: tuple[ModeKind, ...]
    values: dict[TraceKey, FloatArray] = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return len(self.kinds) - 1

    @property
    def steps(self) -> list[int]:
        return sorted({key[0] for key in self.values})

    def keys_for(self, n: int) -> frozenset[tuple[BoundaryVariable, Line]]:
        return REGIME_KEYS[self.kinds[n]]

    def get(self, key: TraceKey) -> FloatArray:
        try:
            return self.values[key]
        except KeyError:
            raise TraceMissingError(key) from None

    def series(self, n: int, variable: BoundaryVariable, line: Line) -> FloatArray:
        """All recorded steps of one trace stacked time-major."""
        return np.stack([self.get((k, n, variable, line)) for k in self.steps])

    def check_dense(self) -> None:
        steps = self.steps
        if steps != list(range(len(steps))):
            raise GridError("traces", "recorded time indices are not dense from 0")


def edge_values(values: FloatArray, rect: InnerRect, line: Line) -> FloatArray:
    match line:
        case "west":
            return values[rect.x0, rect.y0 : rect.y1 + 1].copy()
        case "east":
            return values[rect.x1, rect.y0 : rect.y1 + 1].copy()
        case "south":
            return values[rect.x0 : rect.x1 + 1, rect.y0].copy()
        case "north":
            return values[rect.x0 : rect.x1 + 1, rect.y1].copy()
        case _:
            raise GridError("line", f"unknown boundary line {line!r}")


def record_traces(outer: ModalState, k: int, record: TraceRecord) -> TraceRecord:
    """Append the edge values of time index k to ``record``."""
    if outer.grid != record.grid:
        raise GridError("grid", "outer state does not live on the recording grid")
    record.rect.check_inside(outer.grid)

    buoyancy = outer.params.N_buoy
    for mode in outer.modes:
        if mode.n == 0:
            variables: dict[BoundaryVariable, FloatArray] = {"u": mode.u, "v": mode.v}
        else:
            scaled = mode.psi / buoyancy
            variables = {
                "xi": mode.u - scaled,
                "eta": mode.u + scaled,
                "v": mode.v,
                "alpha": mode.v + scaled,
                "beta": mode.v - scaled,
            }
        for variable, line in record.keys_for(mode.n):
            record.values[(k, mode.n, variable, line)] = edge_values(
                variables[variable], record.rect, line
            )
    return record


class TracePlaybackProvider(BoundaryProvider):
    """Boundary values replayed bit for bit from a :class:`TraceRecord`."""

    def __init__(self, record: TraceRecord):
        self._record = record

    @property
    def record(self) -> TraceRecord:
        return self._record

    def provide(
        self, k: int, n: int, variable: BoundaryVariable, line: Line
    ) -> FloatArray:
        if n > self._record.n_max or (variable, line) not in self._record.keys_for(n):
            raise TraceMissingError((k, n, variable, line))
        return self._record.get((k, n, variable, line))

    def check_compatible(self, grid: Grid2D, time: TimeGrid, n_max: int) -> None:
        inner = self._record.rect.subgrid(self._record.grid)
        if (grid.nx, grid.ny) != (inner.nx, inner.ny) or not (
            np.isclose(grid.dx, inner.dx) and np.isclose(grid.dy, inner.dy)
        ):
            raise GridError(
                "inner", "nested grid does not coincide with the recorded rectangle"
            )
        if not np.isclose(time.dt, self._record.dt, rtol=1e-12, atol=0.0):
            raise ConfigError(
                "K", f"nested dt={time.dt!r} differs from recorded dt={self._record.dt!r}"
            )
        if n_max != self._record.n_max:
            raise ConfigError(
                "N_max", f"run has N_max={n_max}, traces have {self._record.n_max}"
            )
        self._record.check_dense()
        steps = self._record.steps
        if not steps or steps[-1] < time.K:
            raise TraceMissingError((time.K, 0, "u", "west"))
        logger.debug("Playing back %d recorded steps", len(self._record.steps))
