"""Experiment configuration and result records shared across modules."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .network import NetworkParams

MODES = ("stationary", "nonstationary", "hetero_coevo", "homog_diff", "homog_same")
SINGLE_CELL = ("stationary", "nonstationary")
COUPLED = ("hetero_coevo", "homog_diff", "homog_same")


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str = "stationary"
    R: int = 100
    N: int = 10
    N_input: int | None = None
    B: int = 2
    B_prime: int | None = None
    K: int = 0
    C: int = 1
    S: int = 1
    generations: int = 50_000
    cycles: int = 100
    runs_per_landscape: int = 10
    landscapes: int = 10
    log_every: int = 50
    seed: int = 0
    scramble_control: bool = False
    clamp_coupled: bool = False
    p_editable: float = 0.5

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        for name in ("R", "N", "B", "cycles", "runs_per_landscape", "landscapes", "log_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if self.N > self.R:
            raise ValueError(f"N={self.N} exceeds R={self.R}")
        if not 0 <= self.K < self.N:
            raise ValueError(f"K must satisfy 0 <= K <= N-1, got K={self.K}")
        if self.coupled and not (1 <= self.C <= self.N and self.S == 1):
            raise ValueError("coupled modes need 1 <= C <= N and S = 1")

    @property
    def coupled(self) -> bool:
        return self.mode in COUPLED

    @property
    def n_input(self) -> int:
        """Number of clamped leading nodes (0 when clamping is off)."""
        if self.coupled and not self.clamp_coupled:
            return 0
        return self.N if self.N_input is None else self.N_input

    @property
    def label(self) -> str:
        """Mode as written to output files; scrambled controls are tagged."""
        return self.mode + ("_scrambled" if self.scramble_control else "")

    @property
    def cell(self) -> tuple:
        """(mode label, B, K, C) key; C is 0 for single-cell modes."""
        return (self.label, self.B, self.K, self.C if self.coupled else 0)

    @property
    def S_out(self) -> int:
        return self.S if self.coupled else 0

    def network_params(self, *, editing: bool = True) -> NetworkParams:
        return NetworkParams(self.R, self.N, self.B, self.B_prime, self.n_input,
                             coupled=self.coupled, editing=editing, p_editable=self.p_editable)

    def with_(self, **changes) -> ExperimentSpec:
        return replace(self, **changes)


@dataclass
class RunResult:
    final_fitness: float
    final_pct_grna: float
    series: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def initial_pct_grna(self) -> float:
        return self.series[0][2]


@dataclass(frozen=True)
class CellStats:
    n: int
    fitness_mean: float
    fitness_min: float
    fitness_max: float
    pct_mean: float
    pct_min: float
    pct_max: float
