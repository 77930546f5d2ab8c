"""Tests for pe3d type definitions."""

import math

import numpy as np
import pytest

from pe3d import (
    ConfigError,
    Grid2D,
    GridError,
    InnerRect,
    ModalState,
    ModeError,
    ModeField,
    ModeIndex,
    ParameterError,
    PhysicalParams,
    RunConfig,
    TimeGrid,
)
from pe3d._internal.modal_state import zero_state
from pe3d.types import SweepSpec


class TestPhysicalParams:
    """Test physical parameter validation."""

    def test_defaults(self):
        """Test the nested-domain experiment values."""
        params = PhysicalParams()
        assert params.U0_bar == 20.0
        assert params.N_buoy == 1e-2
        assert params.H == 1e4
        assert (params.L1, params.L2) == (1e6, 5e5)

    def test_critical_mode(self):
        """Test n_c from H*N/(pi*U0)."""
        params = PhysicalParams()
        assert params.resonance_ratio == pytest.approx(5 / math.pi)
        assert params.critical_mode == 1

    def test_resonant_ratio_rejected(self):
        """Test an integer H*N/(pi*U0) is refused."""
        with pytest.raises(ParameterError) as exc_info:
            PhysicalParams(N_buoy=2 * math.pi * 20.0 / 1e4)
        assert exc_info.value.key == "N_buoy"

    @pytest.mark.parametrize("name", ["U0_bar", "N_buoy", "H", "L1", "L2"])
    def test_non_positive_rejected(self, name):
        """Test positivity of the scales."""
        with pytest.raises(ParameterError):
            PhysicalParams(**{name: 0.0})

    def test_zero_coriolis_allowed(self):
        """Test f = 0 is a valid configuration."""
        assert PhysicalParams(f=0.0).f == 0.0


class TestGrids:
    """Test grid and rectangle types."""

    def test_grid_spacing(self):
        """Test dx, dy and node coordinates."""
        grid = Grid2D(400, 200, 1e6, 5e5)
        assert grid.dx == 2500.0
        assert grid.dy == 2500.0
        assert grid.shape == (401, 201)
        assert grid.x[-1] == pytest.approx(1e6)
        assert grid.line_length("west") == 201
        assert grid.line_length("south") == 401

    def test_grid_too_small(self):
        """Test fewer than 4 intervals is refused."""
        with pytest.raises(GridError):
            Grid2D(3, 8, 1.0, 1.0)

    def test_time_grid(self):
        """Test dt = T/K."""
        time = TimeGrid(K=1600, T=5e4)
        assert time.dt == 31.25
        assert time.time(4) == 125.0
        with pytest.raises(ConfigError):
            TimeGrid(K=0, T=1.0)

    def test_middle_half(self):
        """Test the middle-half rectangle of the outer grid."""
        grid = Grid2D(400, 200, 1e6, 5e5)
        rect = InnerRect.middle_half(grid)
        assert (rect.x0, rect.x1, rect.y0, rect.y1) == (100, 300, 50, 150)
        sub = rect.subgrid(grid)
        assert (sub.nx, sub.ny) == (200, 100)
        assert (sub.dx, sub.dy) == (grid.dx, grid.dy)

    def test_rect_must_be_inside(self):
        """Test rectangles touching the boundary are refused."""
        grid = Grid2D(16, 16, 1.0, 1.0)
        with pytest.raises(GridError):
            InnerRect(0, 8, 4, 12).check_inside(grid)
        with pytest.raises(GridError):
            InnerRect(4, 6, 4, 12).check_inside(grid)


class TestModalState:
    """Test modal containers."""

    def test_mode_index_kind(self):
        """Test mode 0 and only mode 0 is the zero mode."""
        assert ModeIndex(0, "zero").n == 0
        with pytest.raises(ModeError):
            ModeIndex(1, "zero")
        with pytest.raises(ModeError):
            ModeIndex(0, "subcritical")

    def test_dense_modes_required(self, params, small_grid):
        """Test a gap in the mode list is refused."""
        fields = [
            ModeField.zeros(ModeIndex(0, "zero"), small_grid),
            ModeField.zeros(ModeIndex(2, "supercritical"), small_grid),
        ]
        with pytest.raises(ModeError):
            ModalState(params=params, grid=small_grid, modes=fields)

    def test_shape_checked(self, params, small_grid):
        """Test arrays must match the grid."""
        field = ModeField.zeros(ModeIndex(0, "zero"), small_grid)
        field.u = np.zeros((3, 3))
        with pytest.raises(GridError):
            ModalState(params=params, grid=small_grid, modes=[field])

    def test_restrict_is_node_exact(self, params):
        """Test restriction copies the rectangle's nodes."""
        grid = Grid2D.for_params(params, 16, 16)
        state = zero_state(params, grid, 2)
        state.modes[1].u = np.arange(17 * 17, dtype=float).reshape(17, 17)
        rect = InnerRect(4, 12, 4, 12)

        inner = state.restrict(rect)
        assert inner.grid.nx == 8
        assert inner.params.L1 == inner.grid.L1
        assert not inner.diagnosed
        np.testing.assert_array_equal(inner.modes[1].u, state.modes[1].u[4:13, 4:13])

    def test_copy_is_deep(self, params, small_grid):
        """Test copies do not share arrays."""
        state = zero_state(params, small_grid, 1)
        clone = state.copy()
        clone.modes[1].u[0, 0] = 1.0
        assert state.modes[1].u[0, 0] == 0.0


class TestRunConfig:
    """Test run configuration validation."""

    def test_defaults(self):
        """Test RunConfig with default values."""
        config = RunConfig()
        assert config.n_max == 5
        assert config.levels == 40
        assert config.cadence == 100
        assert config.depth == -2500.0
        assert config.workers == 1
        assert config.inner is None
        assert config.inner_rect == InnerRect(100, 300, 50, 150)

    def test_levels_must_resolve_modes(self):
        """Test too few vertical levels for N_max."""
        with pytest.raises(ConfigError) as exc_info:
            RunConfig(n_max=5, levels=10)
        assert exc_info.value.key == "levels"

    def test_grid_must_match_domain(self):
        """Test grid extents are tied to L1 and L2."""
        with pytest.raises(GridError):
            RunConfig(grid=Grid2D(400, 200, 2e6, 5e5))

    def test_depth_range(self):
        """Test the comparison depth lies in the column."""
        with pytest.raises(ConfigError):
            RunConfig(depth=100.0)


class TestSweepSpec:
    """Test sweep descriptions."""

    def test_direction_from_speed(self):
        """Test the sweep runs downstream."""
        assert SweepSpec(3.0, np.zeros(4)).direction == "increasing"
        assert SweepSpec(-3.0, np.zeros(4)).direction == "decreasing"

    def test_zero_speed_rejected(self):
        """Test a stationary variable cannot be swept."""
        with pytest.raises(ModeError):
            SweepSpec(0.0, np.zeros(4))
