"""Pytest configuration for tests."""

from collections.abc import Callable

import numpy as np
import pytest

from pe3d import Grid2D, ModalState, ModeField, PhysicalParams
from pe3d._internal.modal_state import diagnose_state
from pe3d._internal.vertical_modes import classify_mode

# No async plugin needed since we're using sync tests with anyio.run()

StateFactory = Callable[..., ModalState]


@pytest.fixture
def params() -> PhysicalParams:
    """Nested-domain experiment constants."""
    return PhysicalParams()


@pytest.fixture
def small_grid(params: PhysicalParams) -> Grid2D:
    return Grid2D.for_params(params, 8, 8)


@pytest.fixture
def random_state() -> StateFactory:
    """Build a diagnosed state with random modal coefficients."""

    def _build(
        params: PhysicalParams,
        grid: Grid2D,
        n_max: int,
        rng: np.random.Generator,
        scale: float = 1.0,
    ) -> ModalState:
        modes = []
        for n in range(n_max + 1):
            mode = ModeField.zeros(classify_mode(n, params), grid)
            mode.u = scale * rng.standard_normal(grid.shape)
            mode.v = scale * rng.standard_normal(grid.shape)
            if n == 0:
                mode.phi = scale * rng.standard_normal(grid.shape)
            else:
                mode.psi = scale * params.N_buoy * rng.standard_normal(grid.shape)
            modes.append(mode)
        return diagnose_state(ModalState(params=params, grid=grid, modes=modes))

    return _build
