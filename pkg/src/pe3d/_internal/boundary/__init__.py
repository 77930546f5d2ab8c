"""Boundary value providers for pe3d."""

from abc import ABC, abstractmethod

from ...types import BoundaryVariable, FloatArray, Grid2D, Line, ModeKind, TimeGrid

# (variable, line) pairs each regime needs per step
REGIME_KEYS: dict[ModeKind, frozenset[tuple[BoundaryVariable, Line]]] = {
    "zero": frozenset(
        {
            ("u", "west"),
            ("u", "east"),
            ("v", "west"),
            ("v", "south"),
            ("v", "north"),
        }
    ),
    "subcritical": frozenset(
        {
            ("xi", "west"),
            ("v", "west"),
            ("eta", "east"),
            ("alpha", "north"),
            ("beta", "south"),
        }
    ),
    "supercritical": frozenset(
        {
            ("xi", "west"),
            ("v", "west"),
            ("eta", "west"),
            ("alpha", "north"),
            ("beta", "south"),
        }
    ),
}


class BoundaryProvider(ABC):
    """Abstract source of boundary values for both solvers."""

    @abstractmethod
    def provide(
        self, k: int, n: int, variable: BoundaryVariable, line: Line
    ) -> FloatArray:
        """Values of ``variable`` on ``line`` for mode n at time index k."""
        pass

    @abstractmethod
    def check_compatible(self, grid: Grid2D, time: TimeGrid, n_max: int) -> None:
        """Raise if the provider cannot serve a run on this grid and time grid."""
        pass


__all__ = ["BoundaryProvider", "REGIME_KEYS"]
