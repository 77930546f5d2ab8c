"""Nested-domain primitive equations solver with vertical normal modes."""

from collections.abc import AsyncIterator

from ._errors import (
    BlowUpError,
    ConfigError,
    GridError,
    ModeError,
    ParameterError,
    PE3DError,
    PoissonConvergenceError,
    QuadratureError,
    SnapshotFormatError,
    StaleDiagnosticsError,
    TraceMissingError,
)
from ._internal.boundary import BoundaryProvider
from ._internal.boundary.homogeneous import HomogeneousProvider
from ._internal.boundary.trace import TracePlaybackProvider, TraceRecord
from ._internal.config import parse_config, render_config
from ._internal.metrics import mean_abs_divergence, relative_error
from ._internal.nesting import (
    closed_form_initial_fields,
    initial_condition,
    initial_state,
    run_nested_experiment,
)
from ._internal.simulation import (
    Simulator,
    Trajectory,
    default_provider,
    run_simulation,
)
from ._internal.vertical_modes import classify_mode, mode_table
from .types import (
    ComparisonReport,
    Grid2D,
    InnerRect,
    ModalState,
    ModeField,
    ModeIndex,
    ModeInfo,
    PhysicalParams,
    RunConfig,
    Sample,
    TimeGrid,
)

__version__ = "0.1.0"

__all__ = [
    # Main functions
    "simulate",
    "run_simulation",
    "run_nested_experiment",
    "Simulator",
    "default_provider",
    # Types
    "PhysicalParams",
    "Grid2D",
    "TimeGrid",
    "InnerRect",
    "ModeIndex",
    "ModeInfo",
    "ModeField",
    "ModalState",
    "RunConfig",
    "Sample",
    "Trajectory",
    "ComparisonReport",
    # Boundary values
    "BoundaryProvider",
    "HomogeneousProvider",
    "TracePlaybackProvider",
    "TraceRecord",
    # Helpers
    "classify_mode",
    "mode_table",
    "initial_condition",
    "initial_state",
    "closed_form_initial_fields",
    "relative_error",
    "mean_abs_divergence",
    "parse_config",
    "render_config",
    # Errors
    "PE3DError",
    "ConfigError",
    "ParameterError",
    "GridError",
    "ModeError",
    "StaleDiagnosticsError",
    "QuadratureError",
    "PoissonConvergenceError",
    "TraceMissingError",
    "SnapshotFormatError",
    "BlowUpError",
]


async def simulate(
    config: RunConfig | None = None,
    *,
    provider: BoundaryProvider | None = None,
    initial: ModalState | None = None,
    traces: TraceRecord | None = None,
) -> AsyncIterator[Sample]:
    """
    Run the primitive equations forward in time.

    Args:
        config: Run configuration (defaults to RunConfig() if None, the
                nested-domain experiment on its outer 400x200 grid).
        provider: Boundary values for every step. Defaults to homogeneous
                  values; pass a TracePlaybackProvider for a nested run.
        initial: Starting state (defaults to the configured initial condition).
        traces: Optional record to fill with the edge values of the inner
                rectangle at every time index.

    Yields:
        A Sample at step 0, every ``config.cadence`` steps and the final step

    Raises:
        BlowUpError: On the first non-finite field.
        PoissonConvergenceError: If the pressure increment solve fails.

    Example:
        ```python
        # Outer run with defaults
        async for sample in simulate():
            print(sample.step, sample.norms["u_vol_l2"])

        # Small grid, more output
        params = PhysicalParams()
        config = RunConfig(
            params=params,
            grid=Grid2D.for_params(params, 100, 50),
            time=TimeGrid(K=400, T=5e4),
            n_max=3,
            cadence=20,
        )
        async for sample in simulate(config):
            print(sample.time, sample.norms["div_mean_abs"])
        ```
    """
    if config is None:
        config = RunConfig()

    if initial is None:
        initial = initial_state(config)

    simulator = Simulator(config)

    async for sample in simulator.run(
        initial,
        provider if provider is not None else default_provider(config),
        traces,
    ):
        yield sample
