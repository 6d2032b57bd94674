from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from reusemor.core.errors import ConfigError
from reusemor.models.common import ReuseStrategy
from reusemor.models.solver import GmresConfig, SpaiConfig, as_points


@dataclass(frozen=True)
class ReuseSettings:
    """Preconditioner construction knobs shared by every reduction driver."""

    spai: SpaiConfig = field(default_factory=SpaiConfig)
    # augmentation sweeps for update factors; None follows spai.max_pattern_sweeps, 0 keeps the initial pattern
    update_sweeps: int | None = None
    strategy: ReuseStrategy = ReuseStrategy.SEQUENTIAL
    max_chain_len: int = 16
    threads: int = 1
    # n above which ||I - A P||_f / ||I||_f is not computed
    diagnostics_max_n: int = 3000

    def __post_init__(self) -> None:
        if self.update_sweeps is not None and self.update_sweeps < 0:
            raise ConfigError(f"update_sweeps must be >= 0, got {self.update_sweeps}")
        if self.max_chain_len < 1 or self.threads < 1:
            raise ConfigError("max_chain_len and threads must be >= 1")


@dataclass(frozen=True)
class AirgaConfig:
    # four points linearly spaced in [1, 500]
    expansion_points: tuple[float, ...] = tuple(np.linspace(1.0, 500.0, 4))
    r_max: int = 20
    outer_tol: float = 1e-4
    inner_tol: float = 1e-6
    max_outer: int = 20
    gmres: GmresConfig = field(default_factory=GmresConfig)
    reuse: ReuseSettings = field(default_factory=ReuseSettings)
    # column dropping threshold relative to the leading singular value
    rank_tol: float = 1e-10
    # forces exactly this many sweeps (no expansion point update after the last)
    fixed_sweeps: int | None = None
    # sweeps also stop once no expansion point moves by more than this (relative)
    point_tol: float = 1e-2
    # initial step towards the new points, taken in log(s); halved per point on reversal
    point_relaxation: float = 0.5

    def __post_init__(self) -> None:
        pts = as_points(self.expansion_points)
        object.__setattr__(self, "expansion_points", tuple(float(s) for s in pts))
        if pts.size == 0:
            raise ConfigError("AIRGA needs at least one expansion point")
        if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
            raise ConfigError("expansion points must be positive and finite")
        if np.unique(pts).size != pts.size:
            raise ConfigError("expansion points must be distinct")
        if self.r_max < pts.size:
            raise ConfigError(f"r_max ({self.r_max}) must be >= number of expansion points ({pts.size})")
        if not (self.outer_tol > 0 and self.inner_tol > 0):
            raise ConfigError("AIRGA tolerances must be positive")
        if self.max_outer < 1:
            raise ConfigError("max_outer must be >= 1")
        if self.fixed_sweeps is not None and self.fixed_sweeps < 1:
            raise ConfigError(f"fixed_sweeps must be >= 1 when given, got {self.fixed_sweeps}")
        if not self.point_tol > 0:
            raise ConfigError("point_tol must be > 0")
        if not 0 < self.point_relaxation <= 1:
            raise ConfigError("point_relaxation must lie in (0, 1]")

    @property
    def points(self) -> np.ndarray:
        return np.asarray(self.expansion_points, dtype=np.float64)


@dataclass(frozen=True)
class BirkaConfig:
    r: int = 4
    tol: float = 1e-4
    max_sweeps: int = 50
    gmres: GmresConfig = field(default_factory=GmresConfig)
    reuse: ReuseSettings = field(default_factory=ReuseSettings)
    kron_nnz_cap: int = 200_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ConfigError("BIRKA reduced order r must be >= 1")
        if not self.tol > 0:
            raise ConfigError("BIRKA tol must be > 0")
        if self.max_sweeps < 1:
            raise ConfigError("BIRKA max_sweeps must be >= 1")


@dataclass(frozen=True)
class QbConfig:
    sigmas: tuple[float, ...] = (1.0,)
    p_moments: int = 1
    q_moments: int = 1
    reuse: bool = True
    gmres: GmresConfig = field(default_factory=GmresConfig)
    precond: ReuseSettings = field(default_factory=ReuseSettings)
    rank_tol: float = 1e-10

    def __post_init__(self) -> None:
        pts = as_points(self.sigmas)
        object.__setattr__(self, "sigmas", tuple(float(s) for s in pts))
        if pts.size == 0:
            raise ConfigError("QB-IHOMM needs at least one interpolation point")
        if np.any(pts == 0) or not np.all(np.isfinite(pts)):
            raise ConfigError("interpolation points must be nonzero and finite")
        if np.unique(pts).size != pts.size:
            raise ConfigError("interpolation points must be distinct")
        if self.p_moments < 0 or self.q_moments < 0:
            raise ConfigError("moment counts P and Q must be >= 0")


@dataclass
class ReducedSecondOrder:
    M: np.ndarray
    D: np.ndarray
    K: np.ndarray
    F: np.ndarray
    C: np.ndarray
    V: np.ndarray
    expansion_points: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def r(self) -> int:
        return self.V.shape[1]

    def transfer(self, s: float) -> np.ndarray:
        """H_hat(s) = C^T (s^2 M + s D + K)^{-1} F, q x m."""
        A = s * s * self.M + s * self.D + self.K
        return self.C.T @ np.linalg.solve(A, self.F)


@dataclass
class BirkaState:
    K: np.ndarray
    N: tuple[np.ndarray, ...]
    F: np.ndarray
    C: np.ndarray
    sweep: int = 0
    # real block-diagonal form of K (1x1 and 2x2 blocks) and its transform
    Lambda: np.ndarray | None = None
    R: np.ndarray | None = None
    V: np.ndarray | None = None
    W: np.ndarray | None = None
    converged: bool = False

    @property
    def r(self) -> int:
        return self.K.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the reduced K, sorted by (real, imag)."""
        ev = np.linalg.eigvals(self.K)
        return ev[np.lexsort((ev.imag, ev.real))]

    def transfer(self, s: float) -> np.ndarray:
        """Linear part C^T (s I - K)^{-1} F of the reduced model."""
        r = self.r
        return self.C.T @ np.linalg.solve(s * np.eye(r) - self.K, self.F)


@dataclass
class ReducedQb:
    D: np.ndarray
    K: np.ndarray
    N: np.ndarray
    H: np.ndarray
    F: np.ndarray
    C: np.ndarray
    U: np.ndarray

    @property
    def r(self) -> int:
        return self.U.shape[1]
