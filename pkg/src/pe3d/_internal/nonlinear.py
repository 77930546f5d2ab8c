"""Modal integrals of the advection operator B(u, v, w; theta).

B(u, v, w; theta) = u theta_x + v theta_y + w theta_z. Projecting it onto a
vertical mode couples every pair of modes through the triple products
int U_p U_m U_n dz, int W_p W_m U_n dz and int U_p W_m W_n dz. These have a
closed form from the product-to-sum identities, so the modal integrals are
evaluated as exact truncated convolutions: every index above N_max is dropped.

:func:`quadrature_oracle` evaluates the same integrals by synthesizing the
physical fields on a vertical grid and integrating numerically. It exists to
cross-check the convolutions and is not used by the solvers.
"""

import logging
import math
from functools import lru_cache

import numpy as np

from .._errors import ModeError, QuadratureError, StaleDiagnosticsError
from ..types import (
    BasisKind,
    FloatArray,
    IntegralKind,
    ModalState,
    PhysicalVariable,
    SourceBundle,
)
from .modal_state import coefficient_stack, ddx, ddy, reconstruct_physical
from .vertical_modes import derivative_matrix, project_columns, vertical_grid

logger = logging.getLogger(__name__)


def _norms(n_max: int, H: float) -> FloatArray:
    n = np.arange(n_max + 1)
    return np.where(n == 0, 1.0 / math.sqrt(H), math.sqrt(2.0 / H))


def _zero_sum(*combos: FloatArray) -> list[FloatArray]:
    return [(c == 0).astype(np.float64) for c in combos]


@lru_cache(maxsize=16)
def cosine_triple(n_max: int, H: float) -> FloatArray:
    """T[p, m, n] = int U_p U_m U_n dz over [-H, 0]."""
    p, m, n = np.meshgrid(*(np.arange(n_max + 1),) * 3, indexing="ij")
    hits = _zero_sum(p + m + n, p + m - n, p - m + n, -p + m + n)
    sigma = _norms(n_max, H)
    table = sigma[p] * sigma[m] * sigma[n] * (H / 4) * sum(hits)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=16)
def sine_sine_cosine(n_max: int, H: float) -> FloatArray:
    """T[p, m, n] = int W_p W_m U_n dz; zero whenever p or m is 0."""
    p, m, n = np.meshgrid(*(np.arange(n_max + 1),) * 3, indexing="ij")
    plus = _zero_sum(p - m + n, p - m - n)
    minus = _zero_sum(p + m + n, p + m - n)
    sigma = _norms(n_max, H)
    table = sigma[p] * sigma[m] * sigma[n] * (H / 4) * (sum(plus) - sum(minus))
    table[0, :, :] = 0.0
    table[:, 0, :] = 0.0
    table.setflags(write=False)
    return table


def cosine_sine_sine(n_max: int, H: float) -> FloatArray:
    """T[p, m, n] = int U_p W_m W_n dz."""
    return np.transpose(sine_sine_cosine(n_max, H), (2, 0, 1))


def _check_diagnosed(state: ModalState) -> None:
    if not state.diagnosed:
        raise StaleDiagnosticsError(
            "Modal integrals need phi_n and w_n diagnosed from the current state"
        )


def _cosine_family_integrals(state: ModalState, theta: FloatArray) -> FloatArray:
    """int B(u, v, w; theta) U_n dz for all n, theta in the cosine family."""
    grid, params = state.grid, state.params
    u = coefficient_stack(state, "u")
    v = coefficient_stack(state, "v")
    w = coefficient_stack(state, "w")
    lam = np.arange(state.n_max + 1) * math.pi / params.H

    dx = ddx(theta, grid)
    dy = ddy(theta, grid)
    uuu = cosine_triple(state.n_max, params.H)
    wwu = sine_sine_cosine(state.n_max, params.H)

    horizontal = np.einsum("pmn,pxy,mxy->nxy", uuu, u, dx, optimize=True)
    horizontal += np.einsum("pmn,pxy,mxy->nxy", uuu, v, dy, optimize=True)
    vertical = np.einsum("pmn,pxy,mxy->nxy", wwu, w, lam[:, None, None] * theta, optimize=True)
    result: FloatArray = horizontal - vertical
    return result


def _sine_family_integrals(state: ModalState) -> FloatArray:
    """int B(u, v, w; psi) W_n dz for all n (the n = 0 slice is zero)."""
    grid, params = state.grid, state.params
    u = coefficient_stack(state, "u")
    v = coefficient_stack(state, "v")
    w = coefficient_stack(state, "w")
    psi = coefficient_stack(state, "psi")
    lam = np.arange(state.n_max + 1) * math.pi / params.H

    uww = cosine_sine_sine(state.n_max, params.H)
    horizontal = np.einsum("pmn,pxy,mxy->nxy", uww, u, ddx(psi, grid), optimize=True)
    horizontal += np.einsum("pmn,pxy,mxy->nxy", uww, v, ddy(psi, grid), optimize=True)
    # w_p W_p * lambda_m psi_m U_m against W_n
    vertical = np.einsum(
        "mpn,pxy,mxy->nxy", uww, w, lam[:, None, None] * psi, optimize=True
    )
    result: FloatArray = horizontal + vertical
    return result


def advection_integrals(state: ModalState) -> dict[str, FloatArray]:
    """All modal integrals at once, keyed ``u``, ``v`` and ``psi``.

    Each value is a stack over n = 0..N_max. ``u`` and ``v`` are projected on
    U_n and ``psi`` on W_n.
    """
    _check_diagnosed(state)
    return {
        "u": _cosine_family_integrals(state, coefficient_stack(state, "u")),
        "v": _cosine_family_integrals(state, coefficient_stack(state, "v")),
        "psi": _sine_family_integrals(state),
    }


def _check_kind(
    kind: IntegralKind, n: int, n_max: int
) -> tuple[PhysicalVariable, int]:
    field: PhysicalVariable
    match kind:
        case "u_U0" | "v_U0":
            if n != 0:
                raise ModeError(f"{kind} integrals are taken against U_0, got n={n}")
            return ("u" if kind == "u_U0" else "v"), 0
        case "u_Un":
            field = "u"
        case "v_Un":
            field = "v"
        case "psi_Wn":
            field = "psi"
        case _:
            raise ModeError(f"Unknown integral kind {kind!r}")
    if not 1 <= n <= n_max:
        raise ModeError(f"{kind} needs 1 <= n <= {n_max}, got n={n}")
    return field, n


def b_integral(kind: IntegralKind, n: int, state: ModalState) -> FloatArray:
    """One modal integral of B as a node array."""
    field, index = _check_kind(kind, n, state.n_max)
    _check_diagnosed(state)
    if field == "psi":
        return _sine_family_integrals(state)[index]
    return _cosine_family_integrals(state, coefficient_stack(state, field))[index]


def quadrature_oracle(
    kind: IntegralKind, n: int, state: ModalState, z_resolution: int
) -> FloatArray:
    """Evaluate the same integral from synthesized physical fields."""
    field, index = _check_kind(kind, n, state.n_max)
    if z_resolution < max(8 * state.n_max, 2):
        raise QuadratureError(
            f"Oracle needs at least {8 * state.n_max} vertical intervals, got {z_resolution}"
        )

    z = vertical_grid(state.params, z_resolution)
    physical = reconstruct_physical(state, z, ("u", "v", "w", field))
    theta = physical[field]

    family: BasisKind = "W" if field == "psi" else "U"
    coefficients = coefficient_stack(state, field)
    theta_z = np.tensordot(
        coefficients, derivative_matrix(family, state.n_max, z, state.params), axes=([0], [0])
    )
    advection = (
        physical["u"] * np.gradient(theta, state.grid.dx, axis=0, edge_order=1)
        + physical["v"] * np.gradient(theta, state.grid.dy, axis=1, edge_order=1)
        + physical["w"] * theta_z
    )
    result: FloatArray = project_columns(advection, family, state.n_max, state.params)[index]
    return result


def assemble_sources(state: ModalState, dt: float, *, scaled: bool = False) -> SourceBundle:
    """Right-hand sides of both solvers frozen at the current time level.

    S1, S2 and S3 are the level-k characteristic values plus their forcing,
    which the sweeps apply verbatim. With ``scaled`` the forcing is multiplied
    by dt first.
    """
    _check_diagnosed(state)
    params = state.params
    integrals = advection_integrals(state)

    g0 = np.stack(
        [
            integrals["u"][0],
            integrals["v"][0] + params.f * params.U0_bar * math.sqrt(params.H),
        ]
    )
    bundle = SourceBundle(G0=g0)

    weight = dt if scaled else 1.0
    buoyancy = params.N_buoy
    for mode in state.modes[1:]:
        n = mode.n
        xi = mode.u - mode.psi / buoyancy
        eta = mode.u + mode.psi / buoyancy
        b_u, b_v, b_psi = integrals["u"][n], integrals["v"][n], integrals["psi"][n]

        bundle.S1[n] = xi + weight * (params.f * mode.v - b_u + b_psi / buoyancy)
        bundle.S2[n] = mode.v + weight * (-params.f * (xi + eta) / 2 - b_v)
        bundle.S3[n] = eta + weight * (params.f * mode.v - b_u - b_psi / buoyancy)

    return bundle
