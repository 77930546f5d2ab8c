"""Type definitions for pe3d."""

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
import numpy.typing as npt
from typing_extensions import Self  # For Python < 3.11 compatibility

from ._errors import ConfigError, GridError, ModeError, ParameterError

FloatArray = npt.NDArray[np.float64]

ModeKind = Literal["zero", "subcritical", "supercritical"]
BasisKind = Literal["U", "W"]
Direction = Literal["forward", "inverse"]
SweepDirection = Literal["increasing", "decreasing"]
Line = Literal["west", "east", "south", "north"]
BoundaryVariable = Literal["u", "v", "xi", "eta", "alpha", "beta"]
IntegralKind = Literal["u_U0", "v_U0", "u_Un", "v_Un", "psi_Wn"]
Norm = Literal["l2", "linf"]
ProviderKind = Literal["homogeneous", "trace"]
InitialKind = Literal["closed_form", "zero"]
PhysicalVariable = Literal["u", "v", "w", "psi", "phi"]

PHYSICAL_VARIABLES: tuple[PhysicalVariable, ...] = ("u", "v", "w", "psi", "phi")
LINES: tuple[Line, ...] = ("west", "east", "south", "north")


# Physical setup
@dataclass(frozen=True)
class PhysicalParams:
    """Constants of the stratified base state and of the horizontal domain.

    Defaults are the nested-domain experiment values (SI units).
    """

    U0_bar: float = 20.0
    f: float = 1e-4
    N_buoy: float = 1e-2
    H: float = 1e4
    L1: float = 1e6
    L2: float = 5e5

    def __post_init__(self) -> None:
        for name in ("U0_bar", "N_buoy", "H", "L1", "L2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ParameterError(name, f"must be positive, got {value!r}")
        if not math.isfinite(self.f):
            raise ParameterError("f", f"must be finite, got {self.f!r}")

        ratio = self.resonance_ratio
        nearest = round(ratio)
        if nearest >= 1 and abs(ratio - nearest) <= 1e-9 * ratio:
            raise ParameterError(
                "N_buoy",
                f"H*N/(pi*U0) = {ratio!r} is an integer; the resonant case is "
                "not supported",
            )

    @property
    def resonance_ratio(self) -> float:
        """H*N/(pi*U0); its integer part separates the two regimes."""
        return self.H * self.N_buoy / (math.pi * self.U0_bar)

    @property
    def critical_mode(self) -> int:
        """n_c with n_c*pi/H < N/U0 < (n_c+1)*pi/H."""
        return math.floor(self.resonance_ratio)


@dataclass(frozen=True)
class ModeIndex:
    """Vertical mode number with its flow regime."""

    n: int
    kind: ModeKind

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ModeError(f"Mode number must be non-negative, got {self.n}")
        if (self.n == 0) != (self.kind == "zero"):
            raise ModeError(f"Mode {self.n} cannot have kind {self.kind!r}")


@dataclass(frozen=True)
class ModeInfo:
    """One row of the mode table."""

    mode: ModeIndex
    wavenumber: float
    gravity_speed: float
    fast_speed: float
    slow_speed: float


@dataclass(frozen=True)
class Grid2D:
    """Collocated node lattice on (0, L1) x (0, L2), boundary nodes included.

    ``nx`` and ``ny`` are the interval counts I and J; arrays on this grid have
    shape ``(nx + 1, ny + 1)`` and are indexed ``[i, j]``.
    """

    nx: int
    ny: int
    L1: float
    L2: float

    def __post_init__(self) -> None:
        if self.nx < 4:
            raise GridError("I", f"need at least 4 intervals, got {self.nx}")
        if self.ny < 4:
            raise GridError("J", f"need at least 4 intervals, got {self.ny}")
        if not self.L1 > 0 or not self.L2 > 0:
            raise GridError("L1/L2", "domain extents must be positive")

    @classmethod
    def for_params(cls, params: PhysicalParams, nx: int, ny: int) -> Self:
        return cls(nx=nx, ny=ny, L1=params.L1, L2=params.L2)

    @property
    def dx(self) -> float:
        return self.L1 / self.nx

    @property
    def dy(self) -> float:
        return self.L2 / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx + 1, self.ny + 1)

    @property
    def x(self) -> FloatArray:
        return np.arange(self.nx + 1, dtype=np.float64) * self.dx

    @property
    def y(self) -> FloatArray:
        return np.arange(self.ny + 1, dtype=np.float64) * self.dy

    def line_length(self, line: Line) -> int:
        """Node count along a boundary line."""
        return self.ny + 1 if line in ("west", "east") else self.nx + 1

    def check_shape(self, array: FloatArray, name: str = "field") -> None:
        if array.shape != self.shape:
            raise GridError(
                name, f"expected shape {self.shape}, got {tuple(array.shape)}"
            )


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time discretisation with K steps up to T."""

    K: int
    T: float

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ConfigError("K", f"need at least one step, got {self.K}")
        if not self.T > 0:
            raise ConfigError("T", f"final time must be positive, got {self.T!r}")

    @property
    def dt(self) -> float:
        return self.T / self.K

    def time(self, k: int) -> float:
        return k * self.dt


@dataclass(frozen=True)
class InnerRect:
    """Inner rectangle in outer node indices, edges on node lines."""

    x0: int
    x1: int
    y0: int
    y1: int

    @classmethod
    def middle_half(cls, grid: Grid2D) -> Self:
        """(L1/4, 3L1/4) x (L2/4, 3L2/4), rounded to node lines."""
        return cls(
            x0=grid.nx // 4,
            x1=(3 * grid.nx) // 4,
            y0=grid.ny // 4,
            y1=(3 * grid.ny) // 4,
        )

    def check_inside(self, grid: Grid2D) -> None:
        if not 0 < self.x0 < self.x1 < grid.nx:
            raise GridError(
                "inner", f"x range {self.x0}..{self.x1} not strictly inside 0..{grid.nx}"
            )
        if not 0 < self.y0 < self.y1 < grid.ny:
            raise GridError(
                "inner", f"y range {self.y0}..{self.y1} not strictly inside 0..{grid.ny}"
            )
        if self.x1 - self.x0 < 4 or self.y1 - self.y0 < 4:
            raise GridError("inner", "inner rectangle needs at least 4 intervals per side")

    def subgrid(self, grid: Grid2D) -> Grid2D:
        """Grid on the rectangle with the outer spacing."""
        self.check_inside(grid)
        return Grid2D(
            nx=self.x1 - self.x0,
            ny=self.y1 - self.y0,
            L1=(self.x1 - self.x0) * grid.dx,
            L2=(self.y1 - self.y0) * grid.dy,
        )

    def slices(self) -> tuple[slice, slice]:
        return slice(self.x0, self.x1 + 1), slice(self.y0, self.y1 + 1)


# Modal fields
@dataclass(eq=False)
class ModeField:
    """Horizontal fields of one vertical mode.

    ``u``, ``v`` and ``psi`` are prognostic. For n >= 1 ``phi`` and ``w`` are
    diagnosed from them; for n = 0 ``phi`` is the projection's pressure and
    ``psi`` and ``w`` stay zero.
    """

    mode: ModeIndex
    u: FloatArray
    v: FloatArray
    psi: FloatArray
    phi: FloatArray
    w: FloatArray

    @classmethod
    def zeros(cls, mode: ModeIndex, grid: Grid2D) -> Self:
        return cls(
            mode=mode,
            u=np.zeros(grid.shape),
            v=np.zeros(grid.shape),
            psi=np.zeros(grid.shape),
            phi=np.zeros(grid.shape),
            w=np.zeros(grid.shape),
        )

    @property
    def n(self) -> int:
        return self.mode.n

    def arrays(self) -> dict[str, FloatArray]:
        return {"u": self.u, "v": self.v, "psi": self.psi, "phi": self.phi, "w": self.w}

    def copy(self) -> "ModeField":
        return ModeField(
            mode=self.mode,
            u=self.u.copy(),
            v=self.v.copy(),
            psi=self.psi.copy(),
            phi=self.phi.copy(),
            w=self.w.copy(),
        )


@dataclass(eq=False)
class ModalState:
    """All modes n = 0..N_max on one grid.

    ``diagnosed`` is True while phi_n and w_n (n >= 1) match the prognostic
    fields; solvers hand back states with it cleared until diagnosed again.
    """

    params: PhysicalParams
    grid: Grid2D
    modes: list[ModeField]
    diagnosed: bool = False

    def __post_init__(self) -> None:
        for expected, field_ in enumerate(self.modes):
            if field_.n != expected:
                raise ModeError(
                    f"Mode list must be dense in n; position {expected} holds {field_.n}"
                )
            for name, array in field_.arrays().items():
                self.grid.check_shape(array, f"mode{expected}.{name}")

    @property
    def n_max(self) -> int:
        return len(self.modes) - 1

    def mode(self, n: int) -> ModeField:
        return self.modes[n]

    def copy(self) -> "ModalState":
        return ModalState(
            params=self.params,
            grid=self.grid,
            modes=[m.copy() for m in self.modes],
            diagnosed=self.diagnosed,
        )

    def restrict(self, rect: InnerRect) -> "ModalState":
        """Node-exact restriction to ``rect``; diagnostics are re-derived by the caller."""
        subgrid = rect.subgrid(self.grid)
        sx, sy = rect.slices()
        modes = [
            ModeField(
                mode=m.mode,
                u=m.u[sx, sy].copy(),
                v=m.v[sx, sy].copy(),
                psi=m.psi[sx, sy].copy(),
                phi=m.phi[sx, sy].copy(),
                w=m.w[sx, sy].copy(),
            )
            for m in self.modes
        ]
        return ModalState(
            params=replace(self.params, L1=subgrid.L1, L2=subgrid.L2),
            grid=subgrid,
            modes=modes,
            diagnosed=False,
        )


@dataclass(eq=False)
class CharacteristicViewX:
    """(xi, v, eta) = (u - psi/N, v, u + psi/N)."""

    xi: FloatArray
    v: FloatArray
    eta: FloatArray


@dataclass(eq=False)
class CharacteristicViewY:
    """(u, alpha, beta) = (u, v + psi/N, v - psi/N)."""

    u: FloatArray
    alpha: FloatArray
    beta: FloatArray


@dataclass(eq=False)
class SourceBundle:
    """Right-hand sides frozen at one time level.

    ``G0`` has shape ``(2, nx + 1, ny + 1)``; ``S1``/``S2``/``S3`` map n >= 1
    to the x-substep right-hand sides of xi, v and eta.
    """

    G0: FloatArray
    S1: dict[int, FloatArray] = field(default_factory=dict)
    S2: dict[int, FloatArray] = field(default_factory=dict)
    S3: dict[int, FloatArray] = field(default_factory=dict)

    def for_mode(self, n: int) -> tuple[FloatArray, FloatArray, FloatArray]:
        if n not in self.S1:
            raise ModeError(f"No sources assembled for mode {n}")
        return self.S1[n], self.S2[n], self.S3[n]


@dataclass(eq=False)
class ZeroModeWork:
    """Intermediate products of one pressure-correction step."""

    u_star: FloatArray
    v_star: FloatArray
    delta_phi: FloatArray
    residual: float
    iterations: int = 0


@dataclass(frozen=True)
class SweepSpec:
    """One implicit upwind transport sweep."""

    speed: float
    inflow_values: FloatArray = field(compare=False)

    def __post_init__(self) -> None:
        if self.speed == 0 or not math.isfinite(self.speed):
            raise ModeError(f"Swept variables need a nonzero speed, got {self.speed!r}")

    @property
    def direction(self) -> SweepDirection:
        return "increasing" if self.speed > 0 else "decreasing"


# Runs
@dataclass
class RunConfig:
    """Everything a simulation or a nested experiment needs."""

    params: PhysicalParams = field(default_factory=PhysicalParams)
    grid: Grid2D = field(default_factory=lambda: Grid2D(400, 200, 1e6, 5e5))
    time: TimeGrid = field(default_factory=lambda: TimeGrid(K=1600, T=5e4))
    n_max: int = 5
    levels: int = 40
    provider: ProviderKind = "homogeneous"
    cadence: int = 100
    inner: InnerRect | None = None
    depth: float = -2500.0
    initial: InitialKind = "closed_form"
    scaled_sources: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.grid.L1 != self.params.L1 or self.grid.L2 != self.params.L2:
            raise GridError("L1/L2", "grid extents must match the physical domain")
        if not 0 <= self.n_max <= 10:
            raise ConfigError("N_max", f"must lie in 0..10, got {self.n_max}")
        if self.levels < 2 * self.n_max + 2:
            raise ConfigError(
                "levels",
                f"need at least {2 * self.n_max + 2} vertical intervals for "
                f"N_max={self.n_max}, got {self.levels}",
            )
        if self.cadence < 1:
            raise ConfigError("cadence", f"must be positive, got {self.cadence}")
        if not -self.params.H <= self.depth <= 0:
            raise ConfigError("depth", f"must lie in [-H, 0], got {self.depth!r}")
        if self.workers < 1:
            raise ConfigError("workers", f"must be positive, got {self.workers}")
        if self.inner is not None:
            self.inner.check_inside(self.grid)

    @property
    def inner_rect(self) -> InnerRect:
        return self.inner if self.inner is not None else InnerRect.middle_half(self.grid)


@dataclass(eq=False)
class Sample:
    """State emitted by a run at an output step, with its series row."""

    step: int
    time: float
    state: ModalState
    norms: dict[str, float] = field(default_factory=dict)


@dataclass
class ComparisonReport:
    """Per-sample norms and relative errors of the nested experiment.

    Relative errors divide by the outer solution restricted to the inner
    rectangle. A zero denominator yields NaN and a note in ``flags``.
    """

    columns: list[str]
    rows: list[dict[str, float]] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    depth: float = -2500.0

    def column(self, name: str) -> list[float]:
        return [row[name] for row in self.rows]
