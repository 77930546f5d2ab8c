"""Command-line driver: ``pe3d {run,nest,compare,modes,slice}``."""

import argparse
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

import anyio

from . import simulate
from ._errors import BlowUpError, ConfigError, PE3DError
from ._internal.boundary import BoundaryProvider
from ._internal.boundary.trace import TracePlaybackProvider, TraceRecord
from ._internal.config import parse_config, parse_inner
from ._internal.metrics import series_columns
from ._internal.nesting import (
    compare_runs,
    inner_config,
    initial_state,
    nested_experiment,
)
from ._internal.simulation import new_trace_record
from ._internal.snapshot import (
    SnapshotMeta,
    extract_slice,
    read_config,
    read_state_dir,
    read_traces,
    state_steps,
    write_config,
    write_sample,
    write_series,
    write_snapshot,
    write_traces,
)
from ._internal.vertical_modes import mode_table
from .types import PHYSICAL_VARIABLES, ModalState, RunConfig, Sample

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_BLOW_UP = 3


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.WARNING if quiet else logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        config = parse_config(Path(args.config).read_text(encoding="utf-8"))
    else:
        config = parse_config("")
    if getattr(args, "cadence", None) is not None:
        config = replace(config, cadence=args.cadence)
    if getattr(args, "inner", None) is not None:
        config = replace(config, inner=parse_inner(args.inner))
    return config


class _RunWriter:
    """Streams samples of one run into its directory."""

    def __init__(self, root: Path, config: RunConfig):
        self.root = root
        self.depth = config.depth
        self.rows: list[dict[str, float]] = []
        write_config(root, config)

    def __call__(self, sample: Sample) -> None:
        write_sample(self.root, sample, self.depth)
        self.rows.append(sample.norms)

    def close(self) -> None:
        write_series(self.rows, series_columns(), self.root / "series.csv")


def _run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    out = Path(args.out)
    traces: TraceRecord | None = None
    provider: BoundaryProvider | None = None
    initial: ModalState | None = None

    if config.provider == "trace" or args.traces is not None:
        if args.traces is None:
            raise ConfigError("provider", "trace playback needs --traces OUTER_DIR")
        outer_dir = Path(args.traces)
        outer = read_config(outer_dir)
        rect = outer.inner_rect
        config = replace(inner_config(outer, rect), cadence=config.cadence)
        provider = TracePlaybackProvider(read_traces(outer_dir))
        initial = initial_state(outer).restrict(rect)
    elif config.inner is not None:
        traces = new_trace_record(config)

    writer = _RunWriter(out, config)

    async def _drive() -> None:
        async for sample in simulate(
            config, provider=provider, initial=initial, traces=traces
        ):
            writer(sample)

    try:
        anyio.run(_drive)
    finally:
        writer.close()
    if traces is not None:
        write_traces(out, traces)
    logger.info("Run written to %s", out)
    return EXIT_OK


def _nest(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config = replace(config, provider="homogeneous", inner=config.inner_rect)
    out = Path(args.out)
    outer_writer = _RunWriter(out / "outer", config)
    inner_writer = _RunWriter(out / "inner", inner_config(config, config.inner_rect))

    async def _drive() -> None:
        nested = await nested_experiment(
            config, outer_sink=outer_writer, inner_sink=inner_writer
        )
        write_traces(out / "outer", nested.traces)
        write_series(nested.report.rows, nested.report.columns, out / "report.csv")

    try:
        anyio.run(_drive)
    finally:
        outer_writer.close()
        inner_writer.close()
    logger.info("Nested experiment written to %s", out)
    return EXIT_OK


def _load_states(root: Path) -> dict[int, tuple[float, ModalState]]:
    states: dict[int, tuple[float, ModalState]] = {}
    for step in state_steps(root):
        _, state, time = read_state_dir(root, step)
        states[step] = (time, state)
    return states


def _compare(args: argparse.Namespace) -> int:
    outer_dir, inner_dir = Path(args.outer), Path(args.inner_dir)
    outer_config = read_config(outer_dir)
    inner = {step: state for step, (_, state) in _load_states(inner_dir).items()}
    report = compare_runs(
        _load_states(outer_dir),
        inner,
        outer_config.inner_rect,
        outer_config.depth,
        outer_config.levels,
    )
    for flag in report.flags:
        logger.warning(flag)
    write_series(report.rows, report.columns, Path(args.out))
    logger.info("Report written to %s", args.out)
    return EXIT_OK


def _modes(args: argparse.Namespace) -> int:
    config = _load_config(args)
    params = config.params
    print(
        f"H*N/(pi*U0) = {params.resonance_ratio:.6f}, "
        f"critical mode n_c = {params.critical_mode}"
    )
    print(
        f"{'n':>3} {'regime':<14} {'lambda [1/m]':>14} {'N/lambda':>10} "
        f"{'U0+N/lambda':>12} {'U0-N/lambda':>12}"
    )
    for row in mode_table(params, config.n_max):
        print(
            f"{row.mode.n:>3} {row.mode.kind:<14} {row.wavenumber:>14.6e} "
            f"{row.gravity_speed:>10.4f} {row.fast_speed:>12.4f} "
            f"{row.slow_speed:>12.4f}"
        )
    return EXIT_OK


def _slice(args: argparse.Namespace) -> int:
    config, state, time = read_state_dir(Path(args.run_dir), args.step)
    depth = args.depth if args.depth is not None else config.depth
    values = extract_slice(state, depth, args.variable)
    grid = state.grid
    write_snapshot(
        values,
        SnapshotMeta(args.variable, time, grid.nx, grid.ny, grid.dx, grid.dy),
        Path(args.out),
    )
    logger.info("Slice of %s at z=%g written to %s", args.variable, depth, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pe3d",
        description="Nested-domain 3D primitive equations with vertical modes",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v", "--verbose", action="store_true", help="Log debug messages"
    )
    verbosity.add_argument(
        "-q", "--quiet", action="store_true", help="Log warnings and errors only"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def add_config(command: argparse.ArgumentParser) -> None:
        command.add_argument("--config", help="key=value configuration file")

    run = commands.add_parser("run", help="Run a single simulation")
    add_config(run)
    run.add_argument("--out", required=True, help="Output directory")
    run.add_argument("--cadence", type=int, help="Output every CADENCE steps")
    run.add_argument(
        "--inner", help="x0,x1,y0,y1 node indices; record traces on this rectangle"
    )
    run.add_argument(
        "--traces", help="Directory of a recorded outer run to replay on its rectangle"
    )
    run.set_defaults(handler=_run)

    nest = commands.add_parser("nest", help="Outer run, nested inner run, report")
    add_config(nest)
    nest.add_argument("--out", required=True, help="Output directory")
    nest.add_argument("--cadence", type=int, help="Output every CADENCE steps")
    nest.add_argument("--inner", help="x0,x1,y0,y1 node indices of the inner domain")
    nest.set_defaults(handler=_nest)

    compare = commands.add_parser(
        "compare", help="Recompute the comparison report from two run directories"
    )
    compare.add_argument("outer", help="Outer run directory")
    compare.add_argument("inner_dir", metavar="inner", help="Inner run directory")
    compare.add_argument("--out", default="report.csv", help="Report CSV path")
    compare.set_defaults(handler=_compare)

    modes = commands.add_parser("modes", help="Print the vertical mode table")
    add_config(modes)
    modes.set_defaults(handler=_modes)

    slice_ = commands.add_parser("slice", help="Write a horizontal slice of a run")
    slice_.add_argument("run_dir", help="Run directory")
    slice_.add_argument("--step", type=int, help="Stored step (default: last)")
    slice_.add_argument("--depth", type=float, help="Depth z in m (default: config)")
    slice_.add_argument(
        "--variable", choices=PHYSICAL_VARIABLES, default="u", help="Field to slice"
    )
    slice_.add_argument("--out", required=True, help="Snapshot file to write")
    slice_.set_defaults(handler=_slice)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    _configure_logging(args.verbose, args.quiet)
    try:
        status: int = args.handler(args)
    except BlowUpError as e:
        logger.error("Simulation blew up: %s", e)
        return EXIT_BLOW_UP
    except (PE3DError, OSError) as e:
        logger.error("%s", e)
        return EXIT_FAILURE
    return status


if __name__ == "__main__":
    sys.exit(main())
