"""Operations on modal states: characteristic transforms, diagnostics, synthesis."""

import logging
from typing import Literal, overload

import numpy as np

from .._errors import GridError, ModeError
from ..types import (
    CharacteristicViewX,
    CharacteristicViewY,
    Direction,
    FloatArray,
    Grid2D,
    ModalState,
    ModeField,
    PhysicalParams,
    PhysicalVariable,
)
from .vertical_modes import basis_matrix, classify_mode, eigen_lambda

logger = logging.getLogger(__name__)


def ddx(values: FloatArray, grid: Grid2D) -> FloatArray:
    """Centred x-difference in the interior, one-sided on the west/east nodes.

    x and y are the last two axes, so a stack of modal coefficients shaped
    ``(N_max + 1, nx + 1, ny + 1)`` is differentiated mode by mode.
    """
    return np.gradient(values, grid.dx, axis=-2, edge_order=1)


def ddy(values: FloatArray, grid: Grid2D) -> FloatArray:
    """Centred y-difference in the interior, one-sided on the south/north nodes."""
    return np.gradient(values, grid.dy, axis=-1, edge_order=1)


def horizontal_divergence(u: FloatArray, v: FloatArray, grid: Grid2D) -> FloatArray:
    return ddx(u, grid) + ddy(v, grid)


def _require_baroclinic(mode: ModeField) -> None:
    if mode.n == 0:
        raise ModeError("The zero mode has no temperature component")


@overload
def transform_characteristics_x(
    mode: ModeField,
    direction: Literal["forward"],
    N_buoy: float,
    view: None = None,
) -> CharacteristicViewX: ...


@overload
def transform_characteristics_x(
    mode: ModeField,
    direction: Literal["inverse"],
    N_buoy: float,
    view: CharacteristicViewX,
) -> ModeField: ...


def transform_characteristics_x(
    mode: ModeField,
    direction: Direction,
    N_buoy: float,
    view: CharacteristicViewX | None = None,
) -> CharacteristicViewX | ModeField:
    """Map (u, v, psi) to (xi, v, eta) and back.

    The inverse takes ``view`` and returns a new field of the same mode; phi
    and w are carried over unchanged and are stale until re-diagnosed.
    """
    _require_baroclinic(mode)

    if direction == "forward":
        scaled = mode.psi / N_buoy
        return CharacteristicViewX(xi=mode.u - scaled, v=mode.v.copy(), eta=mode.u + scaled)

    if view is None:
        raise ModeError("Inverse transform needs a characteristic view")
    return ModeField(
        mode=mode.mode,
        u=(view.xi + view.eta) / 2,
        v=view.v.copy(),
        psi=N_buoy * (view.eta - view.xi) / 2,
        phi=mode.phi.copy(),
        w=mode.w.copy(),
    )


@overload
def transform_characteristics_y(
    mode: ModeField,
    direction: Literal["forward"],
    N_buoy: float,
    view: None = None,
) -> CharacteristicViewY: ...


@overload
def transform_characteristics_y(
    mode: ModeField,
    direction: Literal["inverse"],
    N_buoy: float,
    view: CharacteristicViewY,
) -> ModeField: ...


def transform_characteristics_y(
    mode: ModeField,
    direction: Direction,
    N_buoy: float,
    view: CharacteristicViewY | None = None,
) -> CharacteristicViewY | ModeField:
    """Map (u, v, psi) to (u, alpha, beta) and back."""
    _require_baroclinic(mode)

    if direction == "forward":
        scaled = mode.psi / N_buoy
        return CharacteristicViewY(u=mode.u.copy(), alpha=mode.v + scaled, beta=mode.v - scaled)

    if view is None:
        raise ModeError("Inverse transform needs a characteristic view")
    return ModeField(
        mode=mode.mode,
        u=view.u.copy(),
        v=(view.alpha + view.beta) / 2,
        psi=N_buoy * (view.alpha - view.beta) / 2,
        phi=mode.phi.copy(),
        w=mode.w.copy(),
    )


def compute_diagnostics(
    mode: ModeField, grid: Grid2D, params: PhysicalParams
) -> tuple[FloatArray, FloatArray]:
    """Set phi_n = -psi_n/lambda_n and w_n = -div(u_n, v_n)/lambda_n in place."""
    _require_baroclinic(mode)
    lam = eigen_lambda(mode.n, params)
    mode.phi = -mode.psi / lam
    mode.w = -horizontal_divergence(mode.u, mode.v, grid) / lam
    return mode.phi, mode.w


def diagnose_state(state: ModalState) -> ModalState:
    """Refresh the diagnostics of every baroclinic mode in place."""
    for mode in state.modes[1:]:
        compute_diagnostics(mode, state.grid, state.params)
    zero = state.modes[0]
    zero.psi[...] = 0.0
    zero.w[...] = 0.0
    state.diagnosed = True
    return state


def zero_state(params: PhysicalParams, grid: Grid2D, n_max: int) -> ModalState:
    """State with every field zero, mode kinds assigned."""
    modes = [ModeField.zeros(classify_mode(n, params), grid) for n in range(n_max + 1)]
    return ModalState(params=params, grid=grid, modes=modes, diagnosed=True)


def coefficient_stack(state: ModalState, name: str) -> FloatArray:
    """Coefficients of one field for n = 0..N_max, shape (N_max + 1, nx + 1, ny + 1)."""
    return np.stack([mode.arrays()[name] for mode in state.modes])


_FAMILY: dict[PhysicalVariable, Literal["U", "W"]] = {
    "u": "U",
    "v": "U",
    "phi": "U",
    "w": "W",
    "psi": "W",
}


def _current(state: ModalState) -> ModalState:
    if state.diagnosed:
        return state
    logger.debug("Re-deriving stale diagnostics before reconstruction")
    return diagnose_state(state.copy())


def reconstruct_physical(
    state: ModalState,
    z_levels: FloatArray,
    variables: tuple[PhysicalVariable, ...] = ("u", "v", "w", "psi", "phi"),
) -> dict[PhysicalVariable, FloatArray]:
    """Synthesize physical fields on ``z_levels``.

    Each array has shape ``(nx + 1, ny + 1, len(z_levels))``. Stale
    diagnostics are recomputed on a copy.
    """
    current = _current(state)
    depth = np.atleast_1d(np.asarray(z_levels, dtype=np.float64))
    fields: dict[PhysicalVariable, FloatArray] = {}
    for name in variables:
        if name not in _FAMILY:
            raise ModeError(f"Unknown physical variable {name!r}")
        basis = basis_matrix(_FAMILY[name], current.n_max, depth, current.params)
        stack = coefficient_stack(current, name)
        fields[name] = np.tensordot(stack, basis, axes=([0], [0]))
    return fields


def reconstruct_level(
    state: ModalState, z: float, variable: PhysicalVariable
) -> FloatArray:
    """One horizontal slice of a physical field at depth z."""
    return reconstruct_physical(state, np.array([z]), (variable,))[variable][..., 0]


def check_same_grid(a: Grid2D, b: Grid2D) -> None:
    if a != b:
        raise GridError("grid", f"grid mismatch: {a} vs {b}")
