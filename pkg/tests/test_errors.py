"""Tests for pe3d error handling."""

from pe3d import (
    BlowUpError,
    ConfigError,
    GridError,
    ParameterError,
    PE3DError,
    PoissonConvergenceError,
    SnapshotFormatError,
    TraceMissingError,
)


class TestErrorTypes:
    """Test error types and their properties."""

    def test_base_error(self):
        """Test base PE3DError."""
        error = PE3DError("Something went wrong")
        assert str(error) == "Something went wrong"
        assert isinstance(error, Exception)

    def test_config_error(self):
        """Test ConfigError names its key."""
        error = ConfigError("badkey", "unknown configuration key")
        assert isinstance(error, PE3DError)
        assert error.key == "badkey"
        assert "badkey" in str(error)
        assert "unknown configuration key" in str(error)

    def test_parameter_and_grid_errors_are_config_errors(self):
        """Test the configuration error family."""
        assert isinstance(ParameterError("N_buoy", "resonant"), ConfigError)
        assert isinstance(GridError("I", "too small"), ConfigError)

    def test_poisson_error(self):
        """Test PoissonConvergenceError with residual and iterations."""
        error = PoissonConvergenceError("Projection solve stagnated", 1e-3, 7)
        assert error.residual == 1e-3
        assert error.iterations == 7
        assert "Projection solve stagnated" in str(error)
        assert "iterations: 7" in str(error)

    def test_trace_missing_error(self):
        """Test TraceMissingError carries the missing key."""
        error = TraceMissingError((12, 3, "eta", "east"))
        assert error.key == (12, 3, "eta", "east")
        assert "step=12" in str(error)
        assert "'eta'" in str(error)

    def test_snapshot_error(self):
        """Test SnapshotFormatError names the file."""
        error = SnapshotFormatError("/tmp/u.txt", "malformed header")
        assert error.path == "/tmp/u.txt"
        assert "malformed header" in str(error)

    def test_blow_up_error(self):
        """Test BlowUpError with step, variable and mode."""
        error = BlowUpError(42, "psi", 3)
        assert (error.step, error.variable, error.mode) == (42, "psi", 3)
        assert str(error) == "Non-finite psi at step 42 (mode 3)"

    def test_blow_up_error_without_step(self):
        """Test BlowUpError raised inside a substep."""
        assert str(BlowUpError(None, "S1")) == "Non-finite S1"
