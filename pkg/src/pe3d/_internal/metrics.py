"""Norms, relative errors and divergence diagnostics."""

import math

import numpy as np

from .._errors import GridError
from ..types import (
    PHYSICAL_VARIABLES,
    FloatArray,
    Grid2D,
    ModalState,
    Norm,
    PhysicalVariable,
)
from .modal_state import (
    coefficient_stack,
    diagnose_state,
    horizontal_divergence,
    reconstruct_level,
)
from .vertical_modes import vertical_grid


def field_norm(values: FloatArray, grid: Grid2D, norm: Norm) -> float:
    """Grid-weighted L2 or max-abs norm of a node array."""
    if norm == "linf":
        return float(np.max(np.abs(values)))
    return math.sqrt(float(np.sum(values * values)) * grid.dx * grid.dy)


def relative_error(inner: FloatArray, outer: FloatArray, norm: Norm) -> float:
    """||inner - outer|| / ||outer||; NaN when the denominator vanishes.

    Both arrays live on the same nodes, so the grid weights of the L2 norm
    cancel.
    """
    if inner.shape != outer.shape:
        raise GridError(
            "inner", f"shape {inner.shape} does not match {outer.shape}"
        )
    if norm == "linf":
        numerator = float(np.max(np.abs(inner - outer)))
        denominator = float(np.max(np.abs(outer)))
    else:
        numerator = float(np.linalg.norm(inner - outer))
        denominator = float(np.linalg.norm(outer))
    if denominator == 0.0:
        return math.nan
    return numerator / denominator


def mean_abs_divergence(u: FloatArray, v: FloatArray, grid: Grid2D) -> float:
    """Average of |du/dx + dv/dy| over interior nodes."""
    divergence = horizontal_divergence(u, v, grid)
    return float(np.mean(np.abs(divergence[1:-1, 1:-1])))


def _ensure_diagnosed(state: ModalState) -> ModalState:
    return state if state.diagnosed else diagnose_state(state.copy())


def volume_l2(state: ModalState, variable: PhysicalVariable) -> float:
    """3D L2 norm from the modal coefficients (Parseval)."""
    stack = coefficient_stack(_ensure_diagnosed(state), variable)
    return math.sqrt(float(np.sum(stack * stack)) * state.grid.dx * state.grid.dy)


def volume_linf(state: ModalState, variable: PhysicalVariable, levels: int) -> float:
    """Max-abs of the synthesized field over the vertical grid, level by level."""
    current = _ensure_diagnosed(state)
    return max(
        float(np.max(np.abs(reconstruct_level(current, float(z), variable))))
        for z in vertical_grid(state.params, levels)
    )


def volume_relative_error(
    inner: ModalState,
    outer: ModalState,
    variable: PhysicalVariable,
    norm: Norm,
    levels: int,
) -> float:
    """Relative error of the synthesized 3D fields."""
    inner, outer = _ensure_diagnosed(inner), _ensure_diagnosed(outer)
    if norm == "l2":
        return relative_error(
            coefficient_stack(inner, variable), coefficient_stack(outer, variable), "l2"
        )

    numerator = 0.0
    denominator = 0.0
    for z in vertical_grid(outer.params, levels):
        a = reconstruct_level(inner, float(z), variable)
        b = reconstruct_level(outer, float(z), variable)
        numerator = max(numerator, float(np.max(np.abs(a - b))))
        denominator = max(denominator, float(np.max(np.abs(b))))
    if denominator == 0.0:
        return math.nan
    return numerator / denominator


def series_columns() -> list[str]:
    columns = ["step", "time"]
    for name in PHYSICAL_VARIABLES:
        columns += [f"{name}_l2", f"{name}_linf", f"{name}_vol_l2", f"{name}_vol_linf"]
    columns.append("div_mean_abs")
    return columns


def series_row(
    state: ModalState, step: int, time: float, depth: float, levels: int
) -> dict[str, float]:
    """One row of the run series: slice and volume norms, zero-mode divergence."""
    current = _ensure_diagnosed(state)
    row: dict[str, float] = {"step": float(step), "time": time}
    for name in PHYSICAL_VARIABLES:
        layer = reconstruct_level(current, depth, name)
        row[f"{name}_l2"] = field_norm(layer, state.grid, "l2")
        row[f"{name}_linf"] = field_norm(layer, state.grid, "linf")
        row[f"{name}_vol_l2"] = volume_l2(current, name)
        row[f"{name}_vol_linf"] = volume_linf(current, name, levels)
    zero = current.modes[0]
    row["div_mean_abs"] = mean_abs_divergence(zero.u, zero.v, state.grid)
    return row
