"""Splitting step for the baroclinic modes n >= 1.

The x-substep transports (xi, v, eta) with speeds U0 + N/lambda_n, U0 and
U0 - N/lambda_n and carries all level-k forcing. The y-substep transports
(u, alpha, beta) with speeds 0, -N/lambda_n and +N/lambda_n and has no
forcing. Every transport is implicit upwind, so each line is solved by one
substitution pass from its inflow edge.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .._errors import BlowUpError, ModeError
from ..types import (
    CharacteristicViewX,
    CharacteristicViewY,
    FloatArray,
    Grid2D,
    Line,
    ModeField,
    ModeKind,
    PhysicalParams,
    SourceBundle,
    SweepSpec,
)
from .boundary import BoundaryProvider
from .modal_state import (
    compute_diagnostics,
    transform_characteristics_x,
    transform_characteristics_y,
)
from .upwind import implicit_upwind_sweep
from .vertical_modes import eigen_lambda

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class XInflow:
    """Inflow values of the x-substep.

    ``eta`` lies on the east line for subcritical modes and on the west line
    for supercritical ones.
    """

    xi: FloatArray
    v: FloatArray
    eta: FloatArray


@dataclass(frozen=True)
class YInflow:
    """alpha on the north line and beta on the south line."""

    alpha: FloatArray
    beta: FloatArray


def x_sweep_specs(
    kind: ModeKind, inflow: XInflow, params: PhysicalParams, n: int
) -> tuple[SweepSpec, SweepSpec, SweepSpec]:
    """Speeds and inflow values for xi, v and eta."""
    if kind == "zero":
        raise ModeError("The zero mode is advanced by the projection step")
    gravity = params.N_buoy / eigen_lambda(n, params)
    slow = params.U0_bar - gravity
    if (slow < 0) != (kind == "subcritical"):
        raise ModeError(f"Mode {n} is not {kind}: U0 - N/lambda_n = {slow!r}")
    return (
        SweepSpec(params.U0_bar + gravity, inflow.xi),
        SweepSpec(params.U0_bar, inflow.v),
        SweepSpec(slow, inflow.eta),
    )


def _sweep(source: FloatArray, spec: SweepSpec, dt: float, spacing: float, axis: int) -> FloatArray:
    return implicit_upwind_sweep(
        source,
        abs(spec.speed) * dt / spacing,
        spec.inflow_values,
        axis=axis,
        direction=spec.direction,
    )


def x_sweep(
    sources: tuple[FloatArray, FloatArray, FloatArray],
    kind: ModeKind,
    inflow: XInflow,
    grid: Grid2D,
    dt: float,
    params: PhysicalParams,
    n: int,
) -> CharacteristicViewX:
    """Advance (xi, v, eta) to the half step from the right-hand sides S1, S2, S3."""
    for label, source in zip(("S1", "S2", "S3"), sources):
        grid.check_shape(source, label)
        if not np.all(np.isfinite(source)):
            raise BlowUpError(None, label, n)

    specs = x_sweep_specs(kind, inflow, params, n)
    xi, v, eta = (_sweep(s, spec, dt, grid.dx, 0) for s, spec in zip(sources, specs))
    return CharacteristicViewX(xi=xi, v=v, eta=eta)


def y_sweep(
    view: CharacteristicViewY,
    inflow: YInflow,
    grid: Grid2D,
    dt: float,
    params: PhysicalParams,
    n: int,
) -> CharacteristicViewY:
    """Advance (u, alpha, beta) across y; u is carried over unchanged."""
    gravity = params.N_buoy / eigen_lambda(n, params)
    alpha = _sweep(view.alpha, SweepSpec(-gravity, inflow.alpha), dt, grid.dy, 1)
    beta = _sweep(view.beta, SweepSpec(gravity, inflow.beta), dt, grid.dy, 1)
    return CharacteristicViewY(u=view.u.copy(), alpha=alpha, beta=beta)


def inflow_values(
    provider: BoundaryProvider, k: int, n: int, kind: ModeKind
) -> tuple[XInflow, YInflow]:
    """Boundary values of mode n for the step that ends at time index k."""
    eta_line: Line = "east" if kind == "subcritical" else "west"
    x_inflow = XInflow(
        xi=provider.provide(k, n, "xi", "west"),
        v=provider.provide(k, n, "v", "west"),
        eta=provider.provide(k, n, "eta", eta_line),
    )
    y_inflow = YInflow(
        alpha=provider.provide(k, n, "alpha", "north"),
        beta=provider.provide(k, n, "beta", "south"),
    )
    return x_inflow, y_inflow


def step_mode(
    mode: ModeField,
    sources: SourceBundle,
    provider: BoundaryProvider,
    k_next: int,
    grid: Grid2D,
    dt: float,
    params: PhysicalParams,
) -> ModeField:
    """One full splitting step of a baroclinic mode, diagnostics refreshed."""
    n, kind = mode.n, mode.mode.kind
    if kind == "zero":
        raise ModeError("The zero mode is advanced by the projection step")
    x_inflow, y_inflow = inflow_values(provider, k_next, n, kind)

    half = x_sweep(sources.for_mode(n), kind, x_inflow, grid, dt, params, n)
    halfway = transform_characteristics_x(mode, "inverse", params.N_buoy, half)

    across = y_sweep(
        transform_characteristics_y(halfway, "forward", params.N_buoy),
        y_inflow,
        grid,
        dt,
        params,
        n,
    )
    advanced = transform_characteristics_y(halfway, "inverse", params.N_buoy, across)
    compute_diagnostics(advanced, grid, params)
    return advanced
