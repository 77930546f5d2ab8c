"""Initial condition and the outer/inner nested experiment."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, replace

import anyio
import numpy as np

from .._errors import GridError
from ..types import (
    PHYSICAL_VARIABLES,
    ComparisonReport,
    FloatArray,
    Grid2D,
    InnerRect,
    ModalState,
    ModeField,
    PhysicalParams,
    PhysicalVariable,
    RunConfig,
    Sample,
)
from .boundary import REGIME_KEYS
from .boundary.trace import TracePlaybackProvider, TraceRecord, edge_values
from .metrics import (
    field_norm,
    mean_abs_divergence,
    relative_error,
    volume_relative_error,
)
from .modal_state import diagnose_state, reconstruct_level, zero_state
from .simulation import Simulator, default_provider, new_trace_record
from .vertical_modes import classify_mode, project_columns, vertical_grid

logger = logging.getLogger(__name__)

SampleSink = Callable[[Sample], None]


def closed_form_initial_fields(
    x: FloatArray, y: FloatArray, z: FloatArray, params: PhysicalParams
) -> dict[PhysicalVariable, FloatArray]:
    """Closed-form initial u, v, w, phi and psi, broadcast over x, y and z."""
    L1, L2, H, U0 = params.L1, params.L2, params.H, params.U0_bar  # noqa: N806
    X, Y, Z = np.meshgrid(x, y, z, indexing="ij")  # noqa: N806

    sx2, cx2 = np.sin(2 * np.pi * X / L1), np.cos(2 * np.pi * X / L1)
    sx4, cx4 = np.sin(4 * np.pi * X / L1), np.cos(4 * np.pi * X / L1)
    sy2, cy2 = np.sin(2 * np.pi * Y / L2), np.cos(2 * np.pi * Y / L2)
    sy4, cy4 = np.sin(4 * np.pi * Y / L2), np.cos(4 * np.pi * Y / L2)
    cz1, cz2 = np.cos(np.pi * Z / H), np.cos(2 * np.pi * Z / H)
    sz1, sz2 = np.sin(np.pi * Z / H), np.sin(2 * np.pi * Z / H)

    return {
        "u": (X / L1) * (2 * np.pi / L2) * sx2 * cy2 + sx4 * cy4 * cz1,
        "v": -(sx2 + 2 * np.pi * X / L1 * cx2) * sy2 / L1
        + (L2 / L1) * (sx4**2 + sx4 * sy4 * cz1),
        "w": -4 * H / L1 * (sx4 + cx4) * cy4 * sz1,
        "phi": U0 * sx2 * sy2 * (cz1 - cz2),
        "psi": np.pi * U0 / H * sx2 * sy2 * (2 * sz2 - sz1),
    }


def boundary_mismatch(state: ModalState) -> dict[tuple[int, str, str], float]:
    """Largest |value| of every inflow variable on its boundary line.

    A state that meets the homogeneous boundary conditions returns zeros.
    """
    whole = InnerRect(0, state.grid.nx, 0, state.grid.ny)
    buoyancy = state.params.N_buoy
    mismatch: dict[tuple[int, str, str], float] = {}
    for mode in state.modes:
        scaled = mode.psi / buoyancy
        values = {
            "u": mode.u,
            "v": mode.v,
            "xi": mode.u - scaled,
            "eta": mode.u + scaled,
            "alpha": mode.v + scaled,
            "beta": mode.v - scaled,
        }
        for variable, line in sorted(REGIME_KEYS[mode.mode.kind]):
            edge = edge_values(values[variable], whole, line)
            mismatch[(mode.n, variable, line)] = float(np.max(np.abs(edge)))
    return mismatch


def initial_condition(
    grid: Grid2D, z_levels: FloatArray, params: PhysicalParams, n_max: int
) -> ModalState:
    """Project the closed-form initial fields onto modes 0..n_max.

    u, v and phi_0 come from the cosine family and psi from the sine family;
    phi_n and w_n for n >= 1 are then diagnosed from them.
    """
    fields = closed_form_initial_fields(grid.x, grid.y, z_levels, params)
    u = project_columns(fields["u"], "U", n_max, params)
    v = project_columns(fields["v"], "U", n_max, params)
    phi = project_columns(fields["phi"], "U", n_max, params)
    psi = project_columns(fields["psi"], "W", n_max, params)
    w = project_columns(fields["w"], "W", n_max, params)

    modes = []
    for n in range(n_max + 1):
        mode = ModeField.zeros(classify_mode(n, params), grid)
        mode.u, mode.v = u[n], v[n]
        if n == 0:
            mode.phi = phi[0]
        else:
            mode.psi = psi[n]
        modes.append(mode)
    state = diagnose_state(ModalState(params=params, grid=grid, modes=modes))

    if n_max >= 1:
        closed_form_gap = max(
            float(np.max(np.abs(state.modes[n].w - w[n]))) for n in range(1, n_max + 1)
        )
        logger.info(
            "Continuity condition: closed-form w differs from the w diagnosed "
            "from div(u, v) by %.3e m/s",
            closed_form_gap,
        )
    failing = [
        f"mode {n} {variable}=0 on {line} (max {value:.3e})"
        for (n, variable, line), value in sorted(boundary_mismatch(state).items())
        if value > 0.0
    ]
    if failing:
        logger.info(
            "Homogeneous boundary conditions not met by the initial state: %s",
            ", ".join(failing),
        )
    return state


def initial_state(config: RunConfig) -> ModalState:
    """The configured initial condition on the configured grid."""
    if config.initial == "zero":
        return zero_state(config.params, config.grid, config.n_max)
    return initial_condition(
        config.grid,
        vertical_grid(config.params, config.levels),
        config.params,
        config.n_max,
    )


def inner_config(config: RunConfig, rect: InnerRect) -> RunConfig:
    """Configuration of the nested run on ``rect`` with the outer spacing."""
    subgrid = rect.subgrid(config.grid)
    return replace(
        config,
        params=replace(config.params, L1=subgrid.L1, L2=subgrid.L2),
        grid=subgrid,
        provider="trace",
        inner=None,
    )


def report_columns() -> list[str]:
    columns = ["step", "time"]
    for name in PHYSICAL_VARIABLES:
        columns += [
            f"{name}_outer_l2",
            f"{name}_outer_linf",
            f"{name}_inner_l2",
            f"{name}_inner_linf",
            f"{name}_relerr_l2",
            f"{name}_relerr_linf",
            f"{name}_vol_relerr_l2",
            f"{name}_vol_relerr_linf",
        ]
    columns += ["div_outer", "div_inner_direct", "div_inner_nested"]
    return columns


@dataclass
class _OuterSample:
    step: int
    time: float
    restricted: ModalState
    divergence: float


def _outer_sample(
    step: int, time: float, state: ModalState, rect: InnerRect
) -> _OuterSample:
    zero = state.modes[0]
    return _OuterSample(
        step=step,
        time=time,
        restricted=diagnose_state(state.restrict(rect)),
        divergence=mean_abs_divergence(zero.u, zero.v, state.grid),
    )


def comparison_row(
    outer: _OuterSample, inner: ModalState, depth: float, levels: int
) -> tuple[dict[str, float], list[str]]:
    """Report row for one sample time, with flags for zero denominators."""
    restricted = outer.restricted
    row: dict[str, float] = {"step": float(outer.step), "time": outer.time}
    flags: list[str] = []
    for name in PHYSICAL_VARIABLES:
        a = reconstruct_level(restricted, depth, name)
        b = reconstruct_level(inner, depth, name)
        row[f"{name}_outer_l2"] = field_norm(a, inner.grid, "l2")
        row[f"{name}_outer_linf"] = field_norm(a, inner.grid, "linf")
        row[f"{name}_inner_l2"] = field_norm(b, inner.grid, "l2")
        row[f"{name}_inner_linf"] = field_norm(b, inner.grid, "linf")
        row[f"{name}_relerr_l2"] = relative_error(b, a, "l2")
        row[f"{name}_relerr_linf"] = relative_error(b, a, "linf")
        row[f"{name}_vol_relerr_l2"] = volume_relative_error(
            inner, restricted, name, "l2", levels
        )
        row[f"{name}_vol_relerr_linf"] = volume_relative_error(
            inner, restricted, name, "linf", levels
        )
        for suffix in ("relerr_l2", "relerr_linf", "vol_relerr_l2", "vol_relerr_linf"):
            if math.isnan(row[f"{name}_{suffix}"]):
                flags.append(f"step {outer.step}: {name}_{suffix} has a zero denominator")

    row["div_outer"] = outer.divergence
    row["div_inner_direct"] = mean_abs_divergence(
        restricted.modes[0].u, restricted.modes[0].v, restricted.grid
    )
    row["div_inner_nested"] = mean_abs_divergence(
        inner.modes[0].u, inner.modes[0].v, inner.grid
    )
    return row, flags


@dataclass
class NestedRun:
    """Products of a nested experiment."""

    outer: RunConfig
    inner: RunConfig
    traces: TraceRecord
    report: ComparisonReport
    outer_final: ModalState
    inner_final: ModalState


async def nested_experiment(
    config: RunConfig,
    inner_rect: InnerRect | None = None,
    *,
    outer_sink: SampleSink | None = None,
    inner_sink: SampleSink | None = None,
) -> NestedRun:
    """Outer run recording traces, then the inner run replaying them.

    Samples are streamed to the optional sinks as they are produced; only the
    outer solution restricted to the rectangle is kept for the comparison.
    """
    rect = inner_rect if inner_rect is not None else config.inner_rect
    outer_config = replace(config, provider="homogeneous", inner=rect)
    nested_config = inner_config(outer_config, rect)

    initial = initial_state(outer_config)
    traces = new_trace_record(outer_config)
    outer_samples: dict[int, _OuterSample] = {}
    outer_final = initial
    logger.info(
        "Outer run on %dx%d, inner rectangle x %d..%d, y %d..%d",
        outer_config.grid.nx,
        outer_config.grid.ny,
        rect.x0,
        rect.x1,
        rect.y0,
        rect.y1,
    )
    async for sample in Simulator(outer_config).run(
        initial, default_provider(outer_config), traces
    ):
        outer_samples[sample.step] = _outer_sample(
            sample.step, sample.time, sample.state, rect
        )
        outer_final = sample.state
        if outer_sink is not None:
            outer_sink(sample)

    report = ComparisonReport(columns=report_columns(), depth=config.depth)
    inner_final = outer_samples[0].restricted
    logger.info(
        "Inner run on %dx%d with trace playback",
        nested_config.grid.nx,
        nested_config.grid.ny,
    )
    async for sample in Simulator(nested_config).run(
        outer_samples[0].restricted, TracePlaybackProvider(traces)
    ):
        row, flags = comparison_row(
            outer_samples[sample.step], sample.state, config.depth, config.levels
        )
        report.rows.append(row)
        report.flags.extend(flags)
        inner_final = sample.state
        if inner_sink is not None:
            inner_sink(sample)

    for flag in report.flags:
        logger.warning(flag)
    return NestedRun(
        outer=outer_config,
        inner=nested_config,
        traces=traces,
        report=report,
        outer_final=outer_final,
        inner_final=inner_final,
    )


def run_nested_experiment(
    config: RunConfig, inner_rect: InnerRect | None = None
) -> ComparisonReport:
    """Blocking nested experiment; returns only the comparison report."""

    async def _run() -> NestedRun:
        return await nested_experiment(config, inner_rect)

    return anyio.run(_run).report


def compare_runs(
    outer: dict[int, tuple[float, ModalState]],
    inner: dict[int, ModalState],
    rect: InnerRect,
    depth: float,
    levels: int,
) -> ComparisonReport:
    """Report from stored outer and inner states at their common steps."""
    report = ComparisonReport(columns=report_columns(), depth=depth)
    common = sorted(set(outer) & set(inner))
    if not common:
        raise GridError("steps", "outer and inner runs share no output step")
    for step in common:
        time, state = outer[step]
        row, flags = comparison_row(
            _outer_sample(step, time, state, rect), inner[step], depth, levels
        )
        report.rows.append(row)
        report.flags.extend(flags)
    return report
