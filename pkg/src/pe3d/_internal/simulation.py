"""Internal time loop."""

import logging
from collections.abc import AsyncIterator
from dataclasses import dataclass, field
from functools import partial

import anyio
import numpy as np

from .._errors import BlowUpError, ConfigError, PE3DError
from ..types import ModalState, ModeField, RunConfig, Sample, SourceBundle
from .baroclinic import step_mode
from .boundary import BoundaryProvider
from .boundary.homogeneous import HomogeneousProvider
from .boundary.trace import TraceRecord, record_traces
from .metrics import series_row
from .modal_state import diagnose_state
from .nonlinear import assemble_sources
from .vertical_modes import classify_mode, mode_table
from .zero_mode import stability_report, step_zero_mode

logger = logging.getLogger(__name__)


@dataclass
class Trajectory:
    """Everything a finished run produced."""

    config: RunConfig
    samples: list[Sample] = field(default_factory=list)
    traces: TraceRecord | None = None

    @property
    def final(self) -> ModalState:
        return self.samples[-1].state

    @property
    def series(self) -> list[dict[str, float]]:
        return [sample.norms for sample in self.samples]


def check_finite(state: ModalState, step: int) -> None:
    for mode in state.modes:
        for name, values in mode.arrays().items():
            if not np.all(np.isfinite(values)):
                logger.error("Blow-up: non-finite %s in mode %d at step %d", name, mode.n, step)
                raise BlowUpError(step, name, mode.n)


class Simulator:
    """Internal simulation driver."""

    def __init__(self, config: RunConfig):
        """Initialize the driver for one run."""
        self._config = config
        self._limiter = anyio.CapacityLimiter(config.workers)

    async def _advance(
        self,
        state: ModalState,
        sources: SourceBundle,
        provider: BoundaryProvider,
        k_next: int,
    ) -> ModalState:
        """Advance every mode from the frozen level-k state and sources."""
        dt = self._config.time.dt
        advanced: dict[int, ModeField] = {}
        failures: dict[int, PE3DError] = {}
        zero = ModalState(
            params=state.params,
            grid=state.grid,
            modes=[state.modes[0].copy()],
            diagnosed=True,
        )

        async def zero_task() -> None:
            try:
                await anyio.to_thread.run_sync(
                    partial(step_zero_mode, zero, sources, provider, k_next, dt),
                    limiter=self._limiter,
                )
                advanced[0] = zero.modes[0]
            except PE3DError as e:
                failures[0] = e

        async def mode_task(mode: ModeField) -> None:
            try:
                advanced[mode.n] = await anyio.to_thread.run_sync(
                    partial(
                        step_mode,
                        mode,
                        sources,
                        provider,
                        k_next,
                        state.grid,
                        dt,
                        state.params,
                    ),
                    limiter=self._limiter,
                )
            except PE3DError as e:
                failures[mode.n] = e

        async with anyio.create_task_group() as tg:
            tg.start_soon(zero_task)
            for mode in state.modes[1:]:
                tg.start_soon(mode_task, mode)

        if failures:
            raise failures[min(failures)]

        result = ModalState(
            params=state.params,
            grid=state.grid,
            modes=[advanced[n] for n in range(state.n_max + 1)],
        )
        return diagnose_state(result)

    def _sample(self, state: ModalState, step: int) -> Sample:
        config = self._config
        time = config.time.time(step)
        norms = series_row(state, step, time, config.depth, config.levels)
        logger.info(
            "step %d/%d t=%.1f u_l2=%.6e div=%.3e",
            step,
            config.time.K,
            time,
            norms["u_vol_l2"],
            norms["div_mean_abs"],
        )
        return Sample(step=step, time=time, state=state.copy(), norms=norms)

    async def run(
        self,
        initial: ModalState,
        provider: BoundaryProvider,
        traces: TraceRecord | None = None,
    ) -> AsyncIterator[Sample]:
        """Step from ``initial`` to K, yielding samples at the output cadence."""
        config = self._config
        provider.check_compatible(config.grid, config.time, config.n_max)

        logger.info(
            "Run on %dx%d grid, dt=%g s, %d steps, N_max=%d",
            config.grid.nx,
            config.grid.ny,
            config.time.dt,
            config.time.K,
            config.n_max,
        )
        for row in mode_table(config.params, config.n_max):
            logger.info(
                "mode %d: %s, lambda=%.6e, U0-N/lambda=%.4f",
                row.mode.n,
                row.mode.kind,
                row.wavenumber,
                row.slow_speed,
            )
        stability_report(config.grid, config.time)

        state = diagnose_state(initial.copy())
        check_finite(state, 0)
        if traces is not None:
            record_traces(state, 0, traces)
        yield self._sample(state, 0)

        for k in range(config.time.K):
            sources = assemble_sources(state, config.time.dt, scaled=config.scaled_sources)
            state = await self._advance(state, sources, provider, k + 1)
            check_finite(state, k + 1)
            if traces is not None:
                record_traces(state, k + 1, traces)
            if (k + 1) % config.cadence == 0 or k + 1 == config.time.K:
                yield self._sample(state, k + 1)


def default_provider(config: RunConfig) -> BoundaryProvider:
    """Homogeneous boundary values; trace playback must be passed in explicitly."""
    if config.provider == "trace":
        raise ConfigError("provider", "trace playback needs recorded traces")
    return HomogeneousProvider(config.grid)


def new_trace_record(config: RunConfig) -> TraceRecord:
    """Empty record along the configured inner rectangle."""
    return TraceRecord(
        rect=config.inner_rect,
        grid=config.grid,
        dt=config.time.dt,
        kinds=tuple(
            classify_mode(n, config.params).kind for n in range(config.n_max + 1)
        ),
    )


async def collect(
    config: RunConfig,
    initial: ModalState,
    provider: BoundaryProvider | None = None,
    traces: TraceRecord | None = None,
) -> Trajectory:
    """Drain a run into a :class:`Trajectory`."""
    trajectory = Trajectory(config=config, traces=traces)
    simulator = Simulator(config)
    async for sample in simulator.run(
        initial, provider if provider is not None else default_provider(config), traces
    ):
        trajectory.samples.append(sample)
    return trajectory


def run_simulation(
    config: RunConfig,
    initial: ModalState,
    provider: BoundaryProvider | None = None,
    traces: TraceRecord | None = None,
) -> Trajectory:
    """Blocking wrapper around :func:`collect`."""
    return anyio.run(partial(collect, config, initial, provider, traces))
