from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from reusemor.core.errors import ConfigError


@dataclass(frozen=True)
class GmresConfig:
    rel_tol: float = 1e-6
    max_iter: int = 1000
    record_history: bool = True
    # second Gram-Schmidt pass once |V^T w| / |w| exceeds this
    reorth_tol: float = 1e-10

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ConfigError(f"GMRES rel_tol must be > 0, got {self.rel_tol}")
        if self.max_iter < 1:
            raise ConfigError(f"GMRES max_iter must be >= 1, got {self.max_iter}")


@dataclass
class GmresReport:
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    converged: bool = False
    solve_seconds: float = 0.0
    b_norm: float = 0.0
    # ||b - A x|| / ||b|| recomputed once at the end
    true_relative_residual: float = float("nan")
    breakdown: bool = False

    @property
    def relative_residual(self) -> float:
        if not self.residual_history or self.b_norm == 0.0:
            return 0.0
        return self.residual_history[-1] / self.b_norm


class SpaiPattern(str, Enum):
    DIAGONAL = "diagonal"
    PATTERN_OF_A = "a"
    POWER_OF_A = "a-power"


@dataclass(frozen=True)
class SpaiConfig:
    pattern: SpaiPattern = SpaiPattern.PATTERN_OF_A
    # exponent k for POWER_OF_A
    power: int = 2
    fill_tol: float = 1e-4
    max_fill_per_col: int = 50
    max_pattern_sweeps: int = 3
    # |R_kk| <= rank_tol * |R_00| marks a rank-deficient local block
    rank_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not self.fill_tol > 0:
            raise ConfigError(f"SPAI fill_tol must be > 0, got {self.fill_tol}")
        if self.max_fill_per_col < 1:
            raise ConfigError(f"SPAI max_fill_per_col must be >= 1, got {self.max_fill_per_col}")
        if self.max_pattern_sweeps < 0:
            raise ConfigError(f"SPAI max_pattern_sweeps must be >= 0, got {self.max_pattern_sweeps}")
        if self.pattern is SpaiPattern.POWER_OF_A and self.power < 1:
            raise ConfigError(f"SPAI power must be >= 1, got {self.power}")


def update_spai_config(base: SpaiConfig, sweeps: int | None = None) -> SpaiConfig:
    """Config used for update factors: the SPAI rules, with `sweeps` overriding max_pattern_sweeps."""
    if sweeps is None:
        return base
    return replace(base, max_pattern_sweeps=sweeps)


def as_points(values) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1:
        raise ConfigError("points must be a flat list of reals")
    return arr
