"""Error types for pe3d."""


class PE3DError(Exception):
    """Base exception for all pe3d errors."""


class ConfigError(PE3DError):
    """Raised when a configuration value violates its invariant."""

    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"Invalid value for {key!r}: {reason}")


class ParameterError(ConfigError):
    """Raised when physical parameters are out of range or resonant."""


class GridError(ConfigError):
    """Raised for invalid grids, rectangles and array shapes."""


class ModeError(PE3DError):
    """Raised when an operation is asked for a mode it does not apply to."""


class StaleDiagnosticsError(PE3DError):
    """Raised when phi_n and w_n do not match the current prognostic fields."""


class QuadratureError(PE3DError):
    """Raised when vertical samples cannot be integrated reliably."""


class PoissonConvergenceError(PE3DError):
    """Raised when the pressure increment solve misses its tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"{message} (relative residual: {residual:.3e}, "
            f"iterations: {iterations})"
        )


class TraceMissingError(PE3DError):
    """Raised when playback is asked for a trace that was never recorded."""

    def __init__(self, key: tuple[int, int, str, str]):
        self.key = key
        step, n, variable, line = key
        super().__init__(
            f"No trace for step={step} mode={n} variable={variable!r} line={line!r}"
        )


class SnapshotFormatError(PE3DError):
    """Raised when a snapshot file cannot be parsed."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"Malformed snapshot {path}: {reason}")


class BlowUpError(PE3DError):
    """Raised on the first non-finite value produced by a time step."""

    def __init__(self, step: int | None, variable: str, mode: int | None = None):
        self.step = step
        self.variable = variable
        self.mode = mode

        message = f"Non-finite {variable}"
        if step is not None:
            message = f"{message} at step {step}"
        if mode is not None:
            message = f"{message} (mode {mode})"

        super().__init__(message)
