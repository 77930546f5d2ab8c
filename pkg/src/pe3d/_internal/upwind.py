"""Implicit first-order upwind transport along one grid axis."""

import numpy as np
from scipy.signal import lfilter

from .._errors import GridError, ModeError
from ..types import FloatArray, SweepDirection


def implicit_upwind_sweep(
    source: FloatArray,
    courant: float,
    inflow: FloatArray,
    *,
    axis: int,
    direction: SweepDirection,
) -> FloatArray:
    """Solve (1 + c) q_i - c q_{i-1} = S_i upwind from the inflow edge.

    The inflow edge node (index 0 for ``increasing``, the last index for
    ``decreasing``) takes ``inflow``; every other node along ``axis`` follows
    q_i = (S_i + c q_{i-1}) / (1 + c), with i-1 the upstream neighbour. Lines
    across the other axis are independent.
    """
    if not courant > 0 or not np.isfinite(courant):
        raise ModeError(f"Courant number must be positive, got {courant!r}")

    values = np.moveaxis(np.asarray(source, dtype=np.float64), axis, 0)
    edge = np.asarray(inflow, dtype=np.float64)
    if edge.shape != values.shape[1:]:
        raise GridError(
            "inflow", f"expected shape {values.shape[1:]}, got {edge.shape}"
        )
    if direction == "decreasing":
        values = values[::-1]

    gain = 1.0 / (1.0 + courant)
    carry = courant * gain
    swept = np.empty_like(values)
    swept[0] = edge
    # y_i = gain * S_i + carry * y_{i-1}; the filter state seeds y_0 = inflow
    swept[1:] = lfilter([gain], [1.0, -carry], values[1:], axis=0, zi=(carry * edge)[None])[0]

    if direction == "decreasing":
        swept = swept[::-1]
    return np.ascontiguousarray(np.moveaxis(swept, 0, axis))
