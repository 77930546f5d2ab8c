"""Tests for the pressure-correction step of the zero mode."""

import logging
from dataclasses import replace
from unittest.mock import Mock, patch

import numpy as np
import pytest

from pe3d import Grid2D, HomogeneousProvider, PhysicalParams, TimeGrid
from pe3d._errors import PoissonConvergenceError
from pe3d._internal import zero_mode
from pe3d._internal.modal_state import ddx, ddy, zero_state
from pe3d._internal.nonlinear import assemble_sources
from pe3d._internal.zero_mode import (
    NormalData,
    PredictorInflow,
    assemble_projection_matrix,
    correction_substep,
    predictor_substep,
    pressure_poisson_solve,
    projection_operator,
    projection_rhs,
    stability_report,
    step_zero_mode,
)


def _interior_divergence(u, v, grid):
    return (ddx(u, grid) + ddy(v, grid))[1:-1, 1:-1]


def _uniform_inflow(grid, u, v):
    return PredictorInflow(
        u_west=np.full(grid.ny + 1, u),
        v_west=np.full(grid.ny + 1, v),
    )


class TestPredictor:
    """Test the predictor substep."""

    def test_uniform_flow_without_rotation(self):
        """Test a uniform flow with matching inflow is a fixed point."""
        params = PhysicalParams(f=0.0)
        grid = Grid2D.for_params(params, 8, 8)
        u = np.full(grid.shape, 2.0)
        v = np.full(grid.shape, -1.0)
        u_star, v_star = predictor_substep(
            u, v, np.zeros(grid.shape), np.zeros((2, *grid.shape)),
            _uniform_inflow(grid, 2.0, -1.0), grid, 30.0, params,
        )
        np.testing.assert_allclose(u_star, 2.0)
        np.testing.assert_allclose(v_star, -1.0)

    def test_coriolis_sign(self):
        """Test du/dt = +f v and dv/dt = -f u."""
        params = PhysicalParams()
        grid = Grid2D.for_params(params, 8, 8)
        dt = 30.0
        u_star, v_star = predictor_substep(
            np.zeros(grid.shape), np.ones(grid.shape), np.zeros(grid.shape),
            np.zeros((2, *grid.shape)),
            PredictorInflow(
                u_west=np.full(grid.ny + 1, dt * params.f),
                v_west=np.ones(grid.ny + 1),
            ),
            grid, dt, params,
        )
        np.testing.assert_allclose(u_star, dt * params.f)
        np.testing.assert_allclose(v_star, 1.0)


class TestProjection:
    """Test the pressure increment solve."""

    def test_matches_dense_solve(self):
        """Test the sparse solve against a dense bordered system on 4x4."""
        grid = Grid2D(4, 4, 4.0, 4.0)
        rng = np.random.default_rng(5)
        u_star = rng.standard_normal(grid.shape)
        v_star = rng.standard_normal(grid.shape)
        normal = NormalData.zeros(grid)
        dt = 0.1

        increment, residual, _ = pressure_poisson_solve(u_star, v_star, normal, grid, dt)

        operator = projection_operator(grid)
        matrix = np.diag(operator.row_scale) @ assemble_projection_matrix(grid).toarray()
        size = matrix.shape[0]
        bordered = np.zeros((size + 1, size + 1))
        bordered[:size, :size] = matrix
        bordered[:size, size] = 1.0
        bordered[size, :size] = 1.0
        rhs = np.append(operator.row_scale * projection_rhs(u_star, v_star, normal, grid, dt), 0.0)
        dense = np.linalg.solve(bordered, rhs)[:size].reshape(grid.shape)
        dense -= dense.mean()

        assert residual <= 1e-10
        np.testing.assert_allclose(increment, dense, atol=1e-10 * np.max(np.abs(dense)))

    def test_zero_mean_gauge(self):
        """Test the increment has zero mean."""
        grid = Grid2D(8, 8, 8.0, 8.0)
        rng = np.random.default_rng(6)
        increment, _, _ = pressure_poisson_solve(
            rng.standard_normal(grid.shape), rng.standard_normal(grid.shape),
            NormalData.zeros(grid), grid, 1.0,
        )
        assert abs(increment.mean()) <= 1e-12 * np.max(np.abs(increment))

    def test_zero_rhs_short_circuit(self):
        """Test a field that is already projected needs no solve."""
        grid = Grid2D(8, 8, 8.0, 8.0)
        increment, residual, iterations = pressure_poisson_solve(
            np.zeros(grid.shape), np.zeros(grid.shape), NormalData.zeros(grid), grid, 1.0
        )
        assert np.all(increment == 0.0)
        assert (residual, iterations) == (0.0, 0)

    def test_projected_field_is_divergence_free(self):
        """Test interior divergence after the correction."""
        grid = Grid2D(8, 8, 8.0, 8.0)
        rng = np.random.default_rng(7)
        u_star = rng.standard_normal(grid.shape)
        v_star = rng.standard_normal(grid.shape)
        normal = NormalData.zeros(grid)
        increment, _, _ = pressure_poisson_solve(u_star, v_star, normal, grid, 0.5)
        u, v, _ = correction_substep(
            u_star, v_star, increment, np.zeros(grid.shape), grid, 0.5, normal
        )

        scale = np.max(np.abs(_interior_divergence(u_star, v_star, grid)))
        assert np.max(np.abs(_interior_divergence(u, v, grid))) <= 1e-8 * scale
        assert np.all(u[0] == 0.0)
        assert np.all(v[1:-1, -1] == 0.0)

    def test_projection_is_idempotent(self):
        """Test projecting a projected field changes nothing."""
        grid = Grid2D(8, 8, 8.0, 8.0)
        rng = np.random.default_rng(8)
        normal = NormalData.zeros(grid)
        u_star = rng.standard_normal(grid.shape)
        v_star = rng.standard_normal(grid.shape)
        first, _, _ = pressure_poisson_solve(u_star, v_star, normal, grid, 1.0)
        u, v, _ = correction_substep(
            u_star, v_star, first, np.zeros(grid.shape), grid, 1.0, normal
        )

        second, _, _ = pressure_poisson_solve(u, v, normal, grid, 1.0)
        u_again, v_again, _ = correction_substep(
            u, v, second, np.zeros(grid.shape), grid, 1.0, normal
        )
        assert np.max(np.abs(u_again - u)) <= 1e-9
        assert np.max(np.abs(v_again - v)) <= 1e-9

    def _lossy_operator(self, grid, u_star, v_star, normal, dt, error):
        """Wrap the factors so every solve misses the true solution by ``error``."""
        operator = projection_operator(grid)
        rhs = np.append(
            operator.row_scale * projection_rhs(u_star, v_star, normal, grid, dt), 0.0
        )
        exact = operator.factors.solve(rhs)
        factors = Mock()
        factors.solve.side_effect = lambda r: operator.factors.solve(r) + error * exact
        return replace(operator, factors=factors)

    def test_stagnation_at_roundoff_is_accepted(self):
        """Test refinement that stalls just above the target residual returns."""
        grid = Grid2D(8, 8, 8.0, 8.0)
        rng = np.random.default_rng(12)
        u_star = rng.standard_normal(grid.shape)
        v_star = rng.standard_normal(grid.shape)
        normal = NormalData.zeros(grid)
        lossy = self._lossy_operator(grid, u_star, v_star, normal, 1.0, 1e-9)

        with patch.object(zero_mode, "projection_operator", return_value=lossy):
            increment, residual, iterations = pressure_poisson_solve(
                u_star, v_star, normal, grid, 1.0
            )

        assert 1e-10 < residual <= 1e-8
        assert iterations == 2
        assert np.all(np.isfinite(increment))

    def test_stagnation_far_from_target_fails(self):
        """Test a solve stuck well above round-off is reported."""
        grid = Grid2D(8, 8, 8.0, 8.0)
        rng = np.random.default_rng(13)
        u_star = rng.standard_normal(grid.shape)
        v_star = rng.standard_normal(grid.shape)
        normal = NormalData.zeros(grid)
        lossy = self._lossy_operator(grid, u_star, v_star, normal, 1.0, 1e-6)

        with patch.object(zero_mode, "projection_operator", return_value=lossy):
            with pytest.raises(PoissonConvergenceError) as exc_info:
                pressure_poisson_solve(u_star, v_star, normal, grid, 1.0)

        assert exc_info.value.residual > 1e-8

    def test_odd_grid_warns(self, caplog):
        """Test odd interval counts are reported."""
        with caplog.at_level(logging.WARNING, logger="pe3d._internal.zero_mode"):
            projection_operator(Grid2D(7, 9, 7.0, 9.0))
        assert "Odd interval counts" in caplog.text


class TestNormalData:
    """Test boundary flux compatibility."""

    def test_made_compatible(self):
        """Test a net outflow is spread over all four sides."""
        grid = Grid2D(8, 8, 8.0, 8.0)
        data = NormalData(
            west=np.zeros(9), east=np.ones(9), south=np.zeros(9), north=np.zeros(9)
        )
        assert data.flux_defect(grid) == 4.0
        fixed = data.made_compatible(grid)
        assert fixed.flux_defect(grid) == 0.0
        np.testing.assert_allclose(fixed.east, 0.75)
        np.testing.assert_allclose(fixed.north, -0.25)

    def test_compatible_data_unchanged(self):
        """Test zero data is returned as is."""
        grid = Grid2D(8, 8, 8.0, 8.0)
        data = NormalData.zeros(grid)
        assert data.made_compatible(grid) is data


class TestStepZeroMode:
    """Test the full zero-mode step."""

    def test_step_projects_state(self, params, small_grid, random_state):
        """Test u_0, v_0 leave the step divergence-free with homogeneous data."""
        state = random_state(params, small_grid, 2, np.random.default_rng(10))
        zero = state.modes[0]
        before_phi = zero.phi.copy()
        sources = assemble_sources(state, 10.0)

        work = step_zero_mode(state, sources, HomogeneousProvider(small_grid), 1, 10.0)

        scale = np.max(np.abs(_interior_divergence(work.u_star, work.v_star, small_grid)))
        assert np.max(np.abs(_interior_divergence(zero.u, zero.v, small_grid))) <= 1e-8 * scale
        assert work.residual <= 1e-10
        np.testing.assert_allclose(zero.phi, before_phi + work.delta_phi)
        assert np.all(zero.u[0] == 0.0)
        assert np.all(zero.u[-1] == 0.0)

    def test_coriolis_forcing_at_rest_is_absorbed_by_pressure(self):
        """Test the base-flow Coriolis forcing ends up in phi_0, not in v_0."""
        params = PhysicalParams()
        grid = Grid2D.for_params(params, 8, 8)
        dt = TimeGrid(K=1600, T=5e4).dt
        state = zero_state(params, grid, 1)
        sources = assemble_sources(state, dt)
        forcing = params.f * params.U0_bar * np.sqrt(params.H)

        work = step_zero_mode(state, sources, HomogeneousProvider(grid), 1, dt)

        zero = state.modes[0]
        assert np.max(np.abs(work.v_star)) == pytest.approx(dt * forcing, rel=1e-2)
        assert np.max(np.abs(zero.v)) <= 0.05 * dt * forcing
        assert np.all(zero.v[0] == 0.0)
        assert np.all(zero.v[:, 0] == 0.0)
        assert np.all(zero.v[:, -1] == 0.0)
        slope = float(np.mean(ddy(zero.phi, grid)[1:-1, 1:-1]))
        assert slope == pytest.approx(-forcing, rel=5e-2)


class TestStabilityReport:
    """Test the zero-mode stability ratio."""

    def test_experiment_values(self, caplog):
        """Test the ratio of the nested-domain experiment."""
        with caplog.at_level(logging.INFO, logger="pe3d._internal.zero_mode"):
            report = stability_report(Grid2D(400, 200, 1e6, 5e5), TimeGrid(K=1600, T=5e4))
        assert report.dt == 31.25
        assert report.ratio == 31.25 / (2 * 2500.0**2) ** 2
        assert not report.dt_within_bound
        assert "stability ratio" in caplog.text
