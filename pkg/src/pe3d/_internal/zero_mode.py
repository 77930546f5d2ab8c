"""Pressure-correction step for the barotropic (n = 0) mode.

Each step runs an implicit upwind predictor for (u_0, v_0) followed by a
projection. The projection operator is the composition of the module's
divergence and gradient (centred interior, one-sided on the boundary), so the
corrected velocity is discretely divergence-free on interior nodes up to the
solver residual. Boundary rows carry the normal-gradient Neumann data
(v*.n - g)/dt. The predictor leaves its swept values on y=0 and y=L2 and the
prescribed boundary values are written only after the correction.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import SuperLU, splu

from .._errors import BlowUpError, GridError, PoissonConvergenceError
from ..types import (
    FloatArray,
    Grid2D,
    Line,
    ModalState,
    PhysicalParams,
    SourceBundle,
    TimeGrid,
    ZeroModeWork,
)
from .boundary import BoundaryProvider
from .modal_state import ddx, ddy
from .upwind import implicit_upwind_sweep

logger = logging.getLogger(__name__)

POISSON_TOLERANCE = 1e-10
# Refinement that stops improving below this is at the round-off floor.
POISSON_ROUNDOFF_TOLERANCE = 1e-8


@dataclass(frozen=True)
class PredictorInflow:
    """Inflow values of the predictor sweep on x=0."""

    u_west: FloatArray
    v_west: FloatArray


@dataclass(frozen=True)
class NormalData:
    """Prescribed normal velocity after projection on each side.

    West/east arrays run over j = 0..J (corners included), south/north over
    i = 0..I. The projection reads the x-normal value at corners.
    """

    west: FloatArray
    east: FloatArray
    south: FloatArray
    north: FloatArray

    @classmethod
    def zeros(cls, grid: Grid2D) -> "NormalData":
        return cls(
            west=np.zeros(grid.ny + 1),
            east=np.zeros(grid.ny + 1),
            south=np.zeros(grid.nx + 1),
            north=np.zeros(grid.nx + 1),
        )

    def flux_defect(self, grid: Grid2D) -> float:
        """Net outflow over the odd boundary nodes, zero for compatible data."""
        return float(
            grid.dy * np.sum(self.east[1::2][: grid.ny // 2] - self.west[1::2][: grid.ny // 2])
            + grid.dx
            * np.sum(self.north[1::2][: grid.nx // 2] - self.south[1::2][: grid.nx // 2])
        )

    def made_compatible(self, grid: Grid2D) -> "NormalData":
        """Shift every normal flux uniformly so that the net outflow vanishes."""
        if grid.nx % 2 or grid.ny % 2:
            return self
        defect = self.flux_defect(grid)
        if defect == 0.0:
            return self
        shift = defect / (grid.L1 + grid.L2)
        logger.debug("Boundary flux defect %.3e corrected by %.3e", defect, shift)
        return NormalData(
            west=self.west + shift,
            east=self.east - shift,
            south=self.south + shift,
            north=self.north - shift,
        )


def _first_difference(nodes: int, spacing: float) -> sp.csr_matrix:
    half = 0.5 / spacing
    matrix = sp.diags(
        [np.full(nodes - 1, -half), np.full(nodes - 1, half)], [-1, 1], format="lil"
    )
    matrix[0, 0], matrix[0, 1] = -1.0 / spacing, 1.0 / spacing
    matrix[nodes - 1, nodes - 2], matrix[nodes - 1, nodes - 1] = (
        -1.0 / spacing,
        1.0 / spacing,
    )
    return matrix.tocsr()


def gradient_operators(grid: Grid2D) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Sparse x- and y-differences acting on fields raveled in C order."""
    gx = sp.kron(_first_difference(grid.nx + 1, grid.dx), sp.identity(grid.ny + 1))
    gy = sp.kron(sp.identity(grid.nx + 1), _first_difference(grid.ny + 1, grid.dy))
    return gx.tocsr(), gy.tocsr()


def _row_masks(grid: Grid2D) -> tuple[FloatArray, FloatArray, FloatArray]:
    i, j = np.meshgrid(np.arange(grid.nx + 1), np.arange(grid.ny + 1), indexing="ij")
    west_east = (i == 0) | (i == grid.nx)
    south_north = ((j == 0) | (j == grid.ny)) & ~west_east
    interior = ~(west_east | south_north)
    return (
        interior.ravel().astype(np.float64),
        west_east.ravel().astype(np.float64),
        south_north.ravel().astype(np.float64),
    )


def assemble_projection_matrix(grid: Grid2D) -> sp.csr_matrix:
    """Divergence-of-gradient rows inside, normal-gradient rows on the boundary."""
    gx, gy = gradient_operators(grid)
    interior, west_east, south_north = _row_masks(grid)
    matrix = (
        sp.diags(interior) @ (gx @ gx + gy @ gy)
        + sp.diags(west_east) @ gx
        + sp.diags(south_north) @ gy
    )
    return matrix.tocsr()


@dataclass(frozen=True)
class ProjectionOperator:
    """Row-scaled, mean-bordered projection system with its LU factors."""

    grid: Grid2D
    gx: sp.csr_matrix
    gy: sp.csr_matrix
    row_scale: FloatArray
    bordered: sp.csc_matrix
    factors: SuperLU


@lru_cache(maxsize=8)
def projection_operator(grid: Grid2D) -> ProjectionOperator:
    """Factorize the projection system once per grid."""
    if grid.nx % 2 or grid.ny % 2:
        logger.warning(
            "Odd interval counts I=%d J=%d: boundary fluxes cannot be made exactly "
            "compatible and the projected field is only approximately divergence-free",
            grid.nx,
            grid.ny,
        )

    gx, gy = gradient_operators(grid)
    interior, west_east, south_north = _row_masks(grid)
    h = min(grid.dx, grid.dy)
    row_scale = interior * h * h + (west_east + south_north) * h

    size = (grid.nx + 1) * (grid.ny + 1)
    ones = sp.csr_matrix(np.ones((size, 1)))
    bordered = sp.bmat(
        [[sp.diags(row_scale) @ assemble_projection_matrix(grid), ones], [ones.T, None]],
        format="csc",
    )
    try:
        factors = splu(bordered)
    except RuntimeError as e:
        raise PoissonConvergenceError(
            f"Projection system is singular on {grid.nx}x{grid.ny}", math.inf, 0
        ) from e

    logger.debug("Factorized projection system with %d unknowns", size + 1)
    return ProjectionOperator(
        grid=grid,
        gx=gx,
        gy=gy,
        row_scale=row_scale,
        bordered=bordered,
        factors=factors,
    )


def projection_rhs(
    u_star: FloatArray,
    v_star: FloatArray,
    normal: NormalData,
    grid: Grid2D,
    dt: float,
) -> FloatArray:
    """Right-hand side of the unscaled projection system, raveled."""
    interior, west_east, south_north = _row_masks(grid)
    divergence = (ddx(u_star, grid) + ddy(v_star, grid)).ravel()

    u_target = np.zeros(grid.shape)
    u_target[0, :] = normal.west
    u_target[-1, :] = normal.east
    v_target = np.zeros(grid.shape)
    v_target[:, 0] = normal.south
    v_target[:, -1] = normal.north

    rhs = (
        interior * divergence
        + west_east * (u_star - u_target).ravel()
        + south_north * (v_star - v_target).ravel()
    )
    result: FloatArray = rhs / dt
    return result


def pressure_poisson_solve(
    u_star: FloatArray,
    v_star: FloatArray,
    normal: NormalData,
    grid: Grid2D,
    dt: float,
    *,
    initial_guess: FloatArray | None = None,
) -> tuple[FloatArray, float, int]:
    """Solve for the zero-mean pressure increment.

    ``normal`` must already be compatible (see :meth:`NormalData.made_compatible`).
    Returns the increment, the final relative residual of the scaled system and
    the number of refinement iterations. Refinement stops at
    ``POISSON_TOLERANCE``, or earlier when it stagnates below
    ``POISSON_ROUNDOFF_TOLERANCE``.
    """
    operator = projection_operator(grid)
    rhs = np.append(operator.row_scale * projection_rhs(u_star, v_star, normal, grid, dt), 0.0)
    scale = float(np.linalg.norm(rhs))
    if scale == 0.0:
        return np.zeros(grid.shape), 0.0, 0

    solution = np.zeros(rhs.size)
    if initial_guess is not None:
        solution[:-1] = np.asarray(initial_guess, dtype=np.float64).ravel()

    residual_vector = rhs - operator.bordered @ solution
    residual = float(np.linalg.norm(residual_vector)) / scale
    cap = 10 * grid.nx * grid.ny
    iterations = 0
    while residual > POISSON_TOLERANCE:
        if iterations >= cap:
            raise PoissonConvergenceError("Projection solve hit its iteration cap", residual, iterations)
        solution += operator.factors.solve(residual_vector)
        iterations += 1
        residual_vector = rhs - operator.bordered @ solution
        previous, residual = residual, float(np.linalg.norm(residual_vector)) / scale
        if residual > POISSON_TOLERANCE and residual > 0.5 * previous:
            if residual > POISSON_ROUNDOFF_TOLERANCE:
                raise PoissonConvergenceError("Projection solve stagnated", residual, iterations)
            logger.debug("Projection refinement stagnated at round-off, residual %.3e", residual)
            break

    logger.debug("Projection solve: residual %.3e after %d iterations", residual, iterations)
    increment = solution[:-1].reshape(grid.shape)
    increment -= increment.mean()
    return increment, residual, iterations


def correction_substep(
    u_star: FloatArray,
    v_star: FloatArray,
    delta_phi: FloatArray,
    phi: FloatArray,
    grid: Grid2D,
    dt: float,
    normal: NormalData | None = None,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Subtract dt*grad(delta_phi) and accumulate the pressure.

    With ``normal`` the boundary normal components are set to the prescribed
    values afterwards. Boundary values do not enter the interior divergence.
    """
    u = u_star - dt * ddx(delta_phi, grid)
    v = v_star - dt * ddy(delta_phi, grid)
    if normal is not None:
        u[0, :] = normal.west
        u[-1, :] = normal.east
        v[1:, 0] = normal.south[1:]
        v[1:, -1] = normal.north[1:]
    return u, v, phi + delta_phi


def predictor_substep(
    u: FloatArray,
    v: FloatArray,
    phi: FloatArray,
    g0: FloatArray,
    inflow: PredictorInflow,
    grid: Grid2D,
    dt: float,
    params: PhysicalParams,
) -> tuple[FloatArray, FloatArray]:
    """Implicit upwind x-advection with explicit Coriolis, pressure and forcing."""
    for name, array in (("u_0", u), ("v_0", v), ("phi_0", phi), ("G0", g0)):
        if not np.all(np.isfinite(array)):
            raise BlowUpError(None, name, 0)

    rhs_u = u - dt * (-params.f * v + ddx(phi, grid) + g0[0])
    rhs_v = v - dt * (params.f * u + ddy(phi, grid) + g0[1])

    courant = params.U0_bar * dt / grid.dx
    u_star = implicit_upwind_sweep(rhs_u, courant, inflow.u_west, axis=0, direction="increasing")
    v_star = implicit_upwind_sweep(rhs_v, courant, inflow.v_west, axis=0, direction="increasing")
    return u_star, v_star


def boundary_data(
    provider: BoundaryProvider, k: int, grid: Grid2D
) -> tuple[PredictorInflow, NormalData]:
    """Zero-mode boundary values for the step that ends at time index k."""
    inflow = PredictorInflow(
        u_west=provider.provide(k, 0, "u", "west"),
        v_west=provider.provide(k, 0, "v", "west"),
    )
    normal = NormalData(
        west=inflow.u_west,
        east=provider.provide(k, 0, "u", "east"),
        south=provider.provide(k, 0, "v", "south"),
        north=provider.provide(k, 0, "v", "north"),
    )
    sides: tuple[tuple[Line, FloatArray], ...] = (
        ("west", inflow.v_west),
        ("west", normal.west),
        ("east", normal.east),
        ("south", normal.south),
        ("north", normal.north),
    )
    for line, values in sides:
        if values.shape != (grid.line_length(line),):
            raise GridError(line, f"boundary array has shape {values.shape}")
    return inflow, normal


def step_zero_mode(
    state: ModalState,
    sources: SourceBundle,
    provider: BoundaryProvider,
    k_next: int,
    dt: float,
) -> ZeroModeWork:
    """Advance u_0, v_0 and phi_0 of ``state`` in place by one step."""
    grid, params = state.grid, state.params
    zero = state.modes[0]
    inflow, normal = boundary_data(provider, k_next, grid)

    u_star, v_star = predictor_substep(
        zero.u, zero.v, zero.phi, sources.G0, inflow, grid, dt, params
    )
    normal = normal.made_compatible(grid)
    delta_phi, residual, iterations = pressure_poisson_solve(
        u_star, v_star, normal, grid, dt
    )
    zero.u, zero.v, zero.phi = correction_substep(
        u_star, v_star, delta_phi, zero.phi, grid, dt, normal
    )
    # tangential inflow on x=0
    zero.v[0, :] = inflow.v_west
    return ZeroModeWork(
        u_star=u_star,
        v_star=v_star,
        delta_phi=delta_phi,
        residual=residual,
        iterations=iterations,
    )


@dataclass(frozen=True)
class StabilityReport:
    """Ratio dt/(dx^2 + dy^2)^2 and whether dt <= 1/8 holds."""

    ratio: float
    dt: float
    dt_within_bound: bool


def stability_report(grid: Grid2D, time: TimeGrid) -> StabilityReport:
    dt = time.dt
    report = StabilityReport(
        ratio=dt / (grid.dx**2 + grid.dy**2) ** 2,
        dt=dt,
        dt_within_bound=dt <= 0.125,
    )
    logger.info(
        "Zero-mode stability ratio dt/(dx^2+dy^2)^2 = %.3e, dt = %g (dt <= 1/8: %s)",
        report.ratio,
        dt,
        report.dt_within_bound,
    )
    return report
