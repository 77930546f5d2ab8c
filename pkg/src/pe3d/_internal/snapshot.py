"""Text artifacts: snapshots, traces, series and run directories."""

import csv
import logging
import math
import re
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .._errors import ConfigError, GridError, SnapshotFormatError
from ..types import (
    PHYSICAL_VARIABLES,
    FloatArray,
    ModalState,
    ModeField,
    PhysicalVariable,
    RunConfig,
    Sample,
)
from .boundary import REGIME_KEYS
from .boundary.trace import TraceRecord
from .config import parse_config, render_config
from .modal_state import reconstruct_level
from .vertical_modes import classify_mode

logger = logging.getLogger(__name__)

MAGIC = "# pe3d-snapshot v1"
# shortest repr of a float64 never needs more than 17 significant digits
FLOAT_FORMAT = "%.17g"
MODE_FIELDS = ("u", "v", "psi", "phi", "w")

_FIELD_LINE = re.compile(
    r"^# field=(?P<name>\S+) time=(?P<time>\S+) I=(?P<I>\d+) J=(?P<J>\d+)$"
)
_SPACING_LINE = re.compile(r"^# dx=(?P<dx>\S+) dy=(?P<dy>\S+)$")


@dataclass(frozen=True)
class SnapshotMeta:
    """Header of a snapshot file; the array has shape ``(I + 1, J + 1)``."""

    name: str
    time: float
    nx: int
    ny: int
    dx: float
    dy: float


def write_snapshot(values: FloatArray, meta: SnapshotMeta, path: Path) -> None:
    """Three header lines, then rows j = 0..J of the I + 1 values along x."""
    array = np.asarray(values, dtype=np.float64)
    if array.shape != (meta.nx + 1, meta.ny + 1):
        raise GridError(
            meta.name,
            f"shape {array.shape} does not match I={meta.nx} J={meta.ny}",
        )
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="ascii", newline="\n") as handle:
        handle.write(f"{MAGIC}\n")
        handle.write(
            f"# field={meta.name} time={meta.time!r} I={meta.nx} J={meta.ny}\n"
        )
        handle.write(f"# dx={meta.dx!r} dy={meta.dy!r}\n")
        np.savetxt(handle, array.T, fmt=FLOAT_FORMAT, delimiter=" ")


def read_snapshot(path: Path) -> tuple[FloatArray, SnapshotMeta]:
    """Inverse of :func:`write_snapshot`."""
    try:
        text = path.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise SnapshotFormatError(str(path), f"unreadable: {e}") from e

    lines = text.splitlines()
    if len(lines) < 3 or lines[0] != MAGIC:
        raise SnapshotFormatError(str(path), "missing pe3d-snapshot v1 header")
    field_match = _FIELD_LINE.match(lines[1])
    spacing_match = _SPACING_LINE.match(lines[2])
    if field_match is None or spacing_match is None:
        raise SnapshotFormatError(str(path), "malformed header")

    try:
        meta = SnapshotMeta(
            name=field_match["name"],
            time=float(field_match["time"]),
            nx=int(field_match["I"]),
            ny=int(field_match["J"]),
            dx=float(spacing_match["dx"]),
            dy=float(spacing_match["dy"]),
        )
    except ValueError as e:
        raise SnapshotFormatError(str(path), f"bad header value: {e}") from e

    rows = lines[3:]
    if len(rows) != meta.ny + 1:
        raise SnapshotFormatError(
            str(path), f"expected {meta.ny + 1} data rows, found {len(rows)}"
        )
    data = np.empty((meta.ny + 1, meta.nx + 1))
    for j, row in enumerate(rows):
        tokens = row.split()
        if len(tokens) != meta.nx + 1:
            raise SnapshotFormatError(
                str(path),
                f"row {j} has {len(tokens)} values, expected {meta.nx + 1}",
            )
        try:
            data[j] = [float(token) for token in tokens]
        except ValueError as e:
            raise SnapshotFormatError(str(path), f"row {j}: {e}") from e
    return np.ascontiguousarray(data.T), meta


def write_series(
    rows: Iterable[dict[str, float]], columns: list[str], path: Path
) -> None:
    """CSV with a header row; step as an integer, the rest at full precision."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="ascii", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for index, row in enumerate(rows):
            missing = [name for name in columns if name not in row]
            if missing or len(row) != len(columns):
                raise SnapshotFormatError(
                    str(path), f"row {index} does not match the columns: {missing}"
                )
            writer.writerow(
                str(int(row[name])) if name == "step" else FLOAT_FORMAT % row[name]
                for name in columns
            )


def read_series(path: Path) -> list[dict[str, float]]:
    with path.open(encoding="ascii", newline="") as handle:
        return [
            {name: float(value) for name, value in row.items()}
            for row in csv.DictReader(handle)
        ]


def extract_slice(
    state: ModalState, z: float, variable: PhysicalVariable
) -> FloatArray:
    """Physical field ``variable`` on the horizontal plane at depth z."""
    if not -state.params.H <= z <= 0.0 or not math.isfinite(z):
        raise ConfigError("depth", f"must lie in [-{state.params.H!r}, 0], got {z!r}")
    if variable not in PHYSICAL_VARIABLES:
        raise ConfigError("variable", f"unknown variable {variable!r}")
    return reconstruct_level(state, z, variable)


# Run directories
def step_dir(root: Path, kind: str, step: int) -> Path:
    return root / kind / f"step_{step}"


def write_config(root: Path, config: RunConfig) -> None:
    root.mkdir(parents=True, exist_ok=True)
    (root / "config.txt").write_text(render_config(config), encoding="ascii")


def read_config(root: Path) -> RunConfig:
    path = root / "config.txt"
    try:
        text = path.read_text(encoding="ascii")
    except OSError as e:
        raise SnapshotFormatError(str(path), f"unreadable: {e}") from e
    return parse_config(text)


def write_sample(root: Path, sample: Sample, depth: float) -> None:
    """Modal snapshots of every mode and the physical slices at ``depth``."""
    state = sample.state
    grid = state.grid

    def meta(name: str) -> SnapshotMeta:
        return SnapshotMeta(name, sample.time, grid.nx, grid.ny, grid.dx, grid.dy)

    for mode in state.modes:
        for name, values in mode.arrays().items():
            write_snapshot(
                values,
                meta(f"mode{mode.n}/{name}"),
                step_dir(root, "states", sample.step) / f"mode{mode.n}_{name}.txt",
            )
    for variable in PHYSICAL_VARIABLES:
        write_snapshot(
            extract_slice(state, depth, variable),
            meta(variable),
            step_dir(root, "slices", sample.step) / f"{variable}.txt",
        )


def state_steps(root: Path) -> list[int]:
    """Steps with a stored modal state, ascending."""
    states = root / "states"
    if not states.is_dir():
        return []
    return sorted(
        int(entry.name.removeprefix("step_"))
        for entry in states.iterdir()
        if entry.is_dir() and re.fullmatch(r"step_\d+", entry.name)
    )


def read_state_dir(
    root: Path, step: int | None = None
) -> tuple[RunConfig, ModalState, float]:
    """Reload the modal state of ``step`` (default: the last one) and its time."""
    config = read_config(root)
    steps = state_steps(root)
    if not steps:
        raise SnapshotFormatError(str(root), "no stored states")
    chosen = steps[-1] if step is None else step
    if chosen not in steps:
        raise SnapshotFormatError(str(root), f"no state stored for step {chosen}")

    directory = step_dir(root, "states", chosen)
    modes = []
    time = 0.0
    for n in range(config.n_max + 1):
        arrays: dict[str, FloatArray] = {}
        for name in MODE_FIELDS:
            path = directory / f"mode{n}_{name}.txt"
            values, meta = read_snapshot(path)
            if (meta.nx, meta.ny) != (config.grid.nx, config.grid.ny):
                raise SnapshotFormatError(str(path), "grid differs from config.txt")
            arrays[name] = values
            time = meta.time
        modes.append(
            ModeField(
                mode=classify_mode(n, config.params),
                u=arrays["u"],
                v=arrays["v"],
                psi=arrays["psi"],
                phi=arrays["phi"],
                w=arrays["w"],
            )
        )
    state = ModalState(params=config.params, grid=config.grid, modes=modes, diagnosed=True)
    return config, state, time


# Traces
def _trace_path(root: Path, n: int, variable: str, line: str) -> Path:
    return root / "traces" / f"mode{n}_{variable}_{line}.txt"


def write_traces(root: Path, record: TraceRecord) -> None:
    """One file per (mode, variable, line); rows are the time indices 0..K."""
    steps = record.steps
    for n in range(record.n_max + 1):
        for variable, line in sorted(record.keys_for(n)):
            series = record.series(n, variable, line)
            spacing = record.grid.dy if line in ("west", "east") else record.grid.dx
            write_snapshot(
                series.T,
                SnapshotMeta(
                    f"trace/{n}/{variable}/{line}",
                    steps[-1] * record.dt,
                    series.shape[1] - 1,
                    series.shape[0] - 1,
                    spacing,
                    record.dt,
                ),
                _trace_path(root, n, variable, line),
            )


def read_traces(root: Path) -> TraceRecord:
    """Rebuild the record written by :func:`write_traces` next to ``config.txt``."""
    config = read_config(root)
    record = TraceRecord(
        rect=config.inner_rect,
        grid=config.grid,
        dt=config.time.dt,
        kinds=tuple(
            classify_mode(n, config.params).kind for n in range(config.n_max + 1)
        ),
    )
    for n in range(config.n_max + 1):
        for variable, line in sorted(REGIME_KEYS[record.kinds[n]]):
            path = _trace_path(root, n, variable, line)
            values, meta = read_snapshot(path)
            if not np.isclose(meta.dy, record.dt, rtol=1e-12, atol=0.0):
                raise SnapshotFormatError(str(path), "time step differs from config.txt")
            for k in range(meta.ny + 1):
                record.values[(k, n, variable, line)] = values[:, k].copy()
    logger.debug("Read %d trace arrays from %s", len(record.values), root)
    return record
