"""Tests for modal state operations."""

import numpy as np
import pytest

from pe3d import Grid2D, ModeError
from pe3d._internal.modal_state import (
    compute_diagnostics,
    ddx,
    diagnose_state,
    horizontal_divergence,
    reconstruct_level,
    reconstruct_physical,
    transform_characteristics_x,
    transform_characteristics_y,
    zero_state,
)
from pe3d._internal.vertical_modes import eigen_lambda, evaluate_mode


class TestDifferences:
    """Test the horizontal difference operators."""

    def test_linear_field_exact(self):
        """Test d/dx of a linear field everywhere, boundaries included."""
        grid = Grid2D(8, 4, 8.0, 4.0)
        x = np.broadcast_to(grid.x[:, None], grid.shape)
        np.testing.assert_allclose(ddx(3.0 * x, grid), 3.0)

    def test_divergence_of_u_equals_x(self):
        """Test div(x, 0) = 1 at every node."""
        grid = Grid2D(8, 8, 1.0, 1.0)
        u = np.broadcast_to(grid.x[:, None], grid.shape).copy()
        np.testing.assert_allclose(horizontal_divergence(u, np.zeros(grid.shape), grid), 1.0)


class TestCharacteristics:
    """Test the characteristic transforms."""

    def test_x_round_trip(self, params, small_grid, random_state):
        """Test inverse(forward(mode)) restores u, v and psi."""
        state = random_state(params, small_grid, 2, np.random.default_rng(1))
        mode = state.modes[1]
        view = transform_characteristics_x(mode, "forward", params.N_buoy)
        np.testing.assert_allclose(view.xi, mode.u - mode.psi / params.N_buoy)
        back = transform_characteristics_x(mode, "inverse", params.N_buoy, view)
        np.testing.assert_allclose(back.u, mode.u, rtol=1e-14, atol=1e-14)
        np.testing.assert_allclose(back.psi, mode.psi, rtol=1e-12, atol=1e-16)

    def test_y_round_trip(self, params, small_grid, random_state):
        """Test the y transform returns the same mode."""
        state = random_state(params, small_grid, 2, np.random.default_rng(2))
        mode = state.modes[2]
        view = transform_characteristics_y(mode, "forward", params.N_buoy)
        np.testing.assert_allclose(view.alpha - view.beta, 2 * mode.psi / params.N_buoy)
        back = transform_characteristics_y(mode, "inverse", params.N_buoy, view)
        np.testing.assert_allclose(back.v, mode.v, rtol=1e-14, atol=1e-14)
        assert back.mode == mode.mode

    def test_zero_mode_has_no_characteristics(self, params, small_grid):
        """Test the zero mode is refused."""
        state = zero_state(params, small_grid, 1)
        with pytest.raises(ModeError):
            transform_characteristics_x(state.modes[0], "forward", params.N_buoy)

    def test_inverse_needs_view(self, params, small_grid):
        """Test the inverse without a view."""
        state = zero_state(params, small_grid, 1)
        with pytest.raises(ModeError):
            transform_characteristics_y(  # type: ignore[call-overload]
                state.modes[1], "inverse", params.N_buoy
            )


class TestDiagnostics:
    """Test phi_n and w_n."""

    def test_compute_diagnostics(self, params, small_grid):
        """Test phi_n = -psi_n/lambda_n and w_n = -div/lambda_n."""
        state = zero_state(params, small_grid, 2)
        mode = state.modes[2]
        mode.psi[...] = 4.0
        mode.u = np.broadcast_to(small_grid.x[:, None], small_grid.shape).copy()
        phi, w = compute_diagnostics(mode, small_grid, params)
        lam = eigen_lambda(2, params)
        np.testing.assert_allclose(phi, -4.0 / lam)
        np.testing.assert_allclose(w, -1.0 / lam)

    def test_diagnose_marks_state(self, params, small_grid):
        """Test the diagnosed flag is set."""
        state = zero_state(params, small_grid, 1)
        state.diagnosed = False
        assert diagnose_state(state).diagnosed


class TestReconstruction:
    """Test physical fields from modes."""

    def test_shapes(self, params, small_grid, random_state):
        """Test reconstruction returns (nx+1, ny+1, nz) arrays."""
        state = random_state(params, small_grid, 3, np.random.default_rng(3))
        z = np.linspace(-params.H, 0.0, 11)
        fields = reconstruct_physical(state, z)
        assert set(fields) == {"u", "v", "w", "psi", "phi"}
        assert fields["u"].shape == (9, 9, 11)

    def test_w_vanishes_at_lid(self, params, small_grid, random_state):
        """Test the rigid lid."""
        state = random_state(params, small_grid, 3, np.random.default_rng(4))
        np.testing.assert_allclose(reconstruct_level(state, 0.0, "w"), 0.0, atol=1e-12)

    def test_level_is_mode_sum(self, params, small_grid, random_state):
        """Test one level equals the coefficient sum."""
        state = random_state(params, small_grid, 2, np.random.default_rng(5))
        z = -2500.0
        expected = sum(
            state.modes[n].u * evaluate_mode("U", n, z, params) for n in range(3)
        )
        np.testing.assert_allclose(reconstruct_level(state, z, "u"), expected)

    def test_stale_state_rediagnosed(self, params, small_grid, random_state):
        """Test stale diagnostics are recomputed on a copy."""
        state = random_state(params, small_grid, 2, np.random.default_rng(6))
        state.modes[1].psi = state.modes[1].psi * 2
        state.diagnosed = False
        phi = reconstruct_level(state, -2500.0, "phi")
        assert not state.diagnosed
        fresh = diagnose_state(state.copy())
        np.testing.assert_allclose(phi, reconstruct_level(fresh, -2500.0, "phi"))

    def test_unknown_variable(self, params, small_grid):
        """Test an unknown variable name."""
        state = zero_state(params, small_grid, 1)
        with pytest.raises(ModeError):
            reconstruct_physical(state, np.array([-1.0]), ("rho",))  # type: ignore[arg-type]
