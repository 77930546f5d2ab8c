"""Vertical normal modes of the rigid-lid, flat-bottom column."""

import logging
import math
from collections.abc import Sequence
from typing import overload

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import make_interp_spline

from .._errors import ModeError, QuadratureError
from ..types import BasisKind, FloatArray, ModeIndex, ModeInfo, PhysicalParams

logger = logging.getLogger(__name__)

# Linear refinement factor for samples with an odd interval count.
_ODD_REFINE = 4


def eigen_lambda(n: int, params: PhysicalParams) -> float:
    """Return lambda_n = n*pi/H for n >= 1."""
    if n < 1:
        raise ModeError(f"lambda_n is only defined for n >= 1, got n={n}")
    return n * math.pi / params.H


def vertical_grid(params: PhysicalParams, levels: int) -> FloatArray:
    """Uniform depth grid with ``levels`` intervals from z=-H up to z=0."""
    if levels < 1:
        raise QuadratureError(f"Need at least one vertical interval, got {levels}")
    return np.linspace(-params.H, 0.0, levels + 1)


def _norm(n: int, H: float) -> float:
    return 1.0 / math.sqrt(H) if n == 0 else math.sqrt(2.0 / H)


def _check_depth(z: FloatArray, H: float) -> None:
    if np.any(z < -H) or np.any(z > 0.0):
        raise ModeError(f"Depth outside [-{H}, 0]")


@overload
def evaluate_mode(kind: BasisKind, n: int, z: float, params: PhysicalParams) -> float: ...


@overload
def evaluate_mode(
    kind: BasisKind, n: int, z: FloatArray, params: PhysicalParams
) -> FloatArray: ...


def evaluate_mode(
    kind: BasisKind, n: int, z: float | FloatArray, params: PhysicalParams
) -> float | FloatArray:
    """Evaluate U_n (cosine family, n >= 0) or W_n (sine family, n >= 1) at z."""
    if n < 0:
        raise ModeError(f"Mode number must be non-negative, got {n}")
    if kind == "W" and n == 0:
        raise ModeError("W_0 is not part of the basis")

    depth = np.asarray(z, dtype=np.float64)
    _check_depth(depth, params.H)

    lam = n * math.pi / params.H
    if kind == "U":
        values = _norm(n, params.H) * np.cos(lam * depth)
    else:
        values = _norm(n, params.H) * np.sin(lam * depth)

    if np.ndim(z) == 0:
        return float(values)
    return values


def basis_matrix(
    kind: BasisKind, n_max: int, z: FloatArray, params: PhysicalParams
) -> FloatArray:
    """Rows U_n(z) (or W_n(z)) for n = 0..n_max.

    The W row for n = 0 is identically zero so that coefficient arrays of
    both families can share the mode index.
    """
    depth = np.asarray(z, dtype=np.float64)
    _check_depth(depth, params.H)
    n = np.arange(n_max + 1)
    lam = n[:, None] * math.pi / params.H
    norms = np.where(n == 0, 1.0 / math.sqrt(params.H), math.sqrt(2.0 / params.H))
    if kind == "U":
        return norms[:, None] * np.cos(lam * depth[None, :])
    return norms[:, None] * np.sin(lam * depth[None, :])


def derivative_matrix(
    kind: BasisKind, n_max: int, z: FloatArray, params: PhysicalParams
) -> FloatArray:
    """d/dz of :func:`basis_matrix`: U_n' = -lambda_n W_n and W_n' = lambda_n U_n."""
    lam = np.arange(n_max + 1) * math.pi / params.H
    if kind == "U":
        return -lam[:, None] * basis_matrix("W", n_max, z, params)
    # lambda_0 = 0 removes the U_0 row
    return lam[:, None] * basis_matrix("U", n_max, z, params)


def classify_mode(n: int, params: PhysicalParams) -> ModeIndex:
    """Assign the flow regime of mode n from the sign of U0 - N/lambda_n."""
    if n < 0:
        raise ModeError(f"Mode number must be non-negative, got {n}")
    if n == 0:
        return ModeIndex(0, "zero")

    slow = params.U0_bar - params.N_buoy / eigen_lambda(n, params)
    return ModeIndex(n, "subcritical" if slow < 0 else "supercritical")


def mode_table(params: PhysicalParams, n_max: int) -> list[ModeInfo]:
    """Wavenumbers, characteristic speeds and regimes for n = 1..n_max."""
    rows = []
    for n in range(1, n_max + 1):
        lam = eigen_lambda(n, params)
        gravity = params.N_buoy / lam
        rows.append(
            ModeInfo(
                mode=classify_mode(n, params),
                wavenumber=lam,
                gravity_speed=gravity,
                fast_speed=params.U0_bar + gravity,
                slow_speed=params.U0_bar - gravity,
            )
        )
    return rows


def simpson_weights(z: FloatArray) -> FloatArray:
    """Composite Simpson weights on the uniform grid ``z`` (even interval count)."""
    if (len(z) - 1) % 2:
        raise QuadratureError(
            f"Simpson weights need an even interval count, got {len(z) - 1}"
        )
    weights: FloatArray = simpson(np.eye(len(z)), x=z, axis=-1)
    return weights


def _refined(samples: FloatArray, z: FloatArray) -> tuple[FloatArray, FloatArray]:
    intervals = len(z) - 1
    if intervals % 2 == 0:
        return samples, z
    fine = np.linspace(z[0], z[-1], _ODD_REFINE * intervals + 1)
    spline = make_interp_spline(z, samples, k=1, axis=-1)
    logger.debug(
        "Refined %d odd vertical intervals to %d for Simpson quadrature",
        intervals,
        len(fine) - 1,
    )
    return np.asarray(spline(fine), dtype=np.float64), fine


def _check_samples(samples: FloatArray, required: int) -> None:
    intervals = samples.shape[-1] - 1
    if intervals < required:
        raise QuadratureError(
            f"Vertical grid too coarse: {intervals} intervals, need at least {required}"
        )
    if not np.all(np.isfinite(samples)):
        raise QuadratureError("Vertical samples contain non-finite values")


def project_coefficient(
    samples: Sequence[float] | FloatArray,
    kind: BasisKind,
    n: int,
    params: PhysicalParams,
    *,
    n_max: int | None = None,
) -> float:
    """Integrate ``samples`` times U_n or W_n over [-H, 0].

    ``samples`` live on the uniform grid from z=-H to z=0. The grid must carry
    at least 2*n_max+2 intervals, where ``n_max`` defaults to ``n``.
    """
    values = np.asarray(samples, dtype=np.float64)
    _check_samples(values, 2 * max(n, n_max if n_max is not None else n) + 2)

    z = np.linspace(-params.H, 0.0, len(values))
    values, z = _refined(values, z)
    basis = evaluate_mode(kind, n, z, params)
    return float(simpson(values * basis, x=z))


def project_columns(
    samples: FloatArray, kind: BasisKind, n_max: int, params: PhysicalParams
) -> FloatArray:
    """Project every column of ``samples`` (vertical axis last) onto n = 0..n_max.

    Returns shape ``(n_max + 1, *samples.shape[:-1])``. For the W family the
    n = 0 slice is zero.
    """
    values = np.asarray(samples, dtype=np.float64)
    _check_samples(values, 2 * n_max + 2)

    z = np.linspace(-params.H, 0.0, values.shape[-1])
    values, z = _refined(values, z)
    kernel = simpson_weights(z)[None, :] * basis_matrix(kind, n_max, z, params)
    coefficients = np.tensordot(values, kernel, axes=([-1], [1]))
    return np.moveaxis(coefficients, -1, 0)


@overload
def synthesize_profile(
    coeffs: Sequence[float] | FloatArray,
    kind: BasisKind,
    z: float,
    params: PhysicalParams,
) -> float: ...


@overload
def synthesize_profile(
    coeffs: Sequence[float] | FloatArray,
    kind: BasisKind,
    z: FloatArray,
    params: PhysicalParams,
) -> FloatArray: ...


def synthesize_profile(
    coeffs: Sequence[float] | FloatArray,
    kind: BasisKind,
    z: float | FloatArray,
    params: PhysicalParams,
) -> float | FloatArray:
    """Sum coefficient times basis value.

    U coefficients are indexed n = 0..N_max, W coefficients n = 1..N_max.
    """
    values = np.asarray(coeffs, dtype=np.float64)
    depth = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if kind == "U":
        n_max = len(values) - 1
        padded = values
    else:
        n_max = len(values)
        padded = np.concatenate(([0.0], values))
    if n_max < 0:
        raise ModeError("Need at least one coefficient")

    profile = padded @ basis_matrix(kind, n_max, depth, params)
    if np.ndim(z) == 0:
        return float(profile[0])
    return np.asarray(profile, dtype=np.float64)
