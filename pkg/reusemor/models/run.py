"""
RunConfig: everything one CLI run needs, validated before any computation.

Values come from Settings (environment), then an optional sectioned
`key = value` file, then command-line flags.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from reusemor.core.errors import ConfigError
from reusemor.models.common import PrecondMode, ReuseStrategy
from reusemor.models.mor import AirgaConfig, BirkaConfig, QbConfig, ReuseSettings
from reusemor.models.solver import GmresConfig, SpaiConfig, SpaiPattern


ALGORITHMS = ("airga", "birka", "qbihomm")


def _points(raw: str) -> tuple[float, ...]:
    parts = [p for p in raw.replace(",", " ").split() if p]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _paths(raw: str) -> tuple[Path, ...]:
    return tuple(Path(p.strip()) for p in raw.split(",") if p.strip())


def _bool(raw: str) -> bool:
    key = raw.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _optional_int(raw: str) -> int | None:
    return None if raw.strip().lower() in ("", "none") else int(raw)


# section -> key -> parser; the key is also the RunConfig field name
KEYS: dict[str, dict[str, Callable[[str], Any]]] = {
    "run": {
        "algorithm": str.lower,
        "precond": PrecondMode.parse,
        "reuse_strategy": ReuseStrategy,
        "seed": int,
        "threads": int,
        "output_dir": Path,
        "prefix": str,
        "error_curve": _bool,
    },
    "model": {
        "n": int,
        "omega": float,
        "alpha": float,
        "beta": float,
        "inputs": int,
        "matrix_M": Path,
        "matrix_D": Path,
        "matrix_K": Path,
        "matrix_F": Path,
        "matrix_C": Path,
        "matrix_N": _paths,
        "matrix_H": Path,
    },
    "points": {
        "expansion_points": _points,
        "sigmas": _points,
        "freq_min": float,
        "freq_max": float,
        "freq_count": int,
    },
    "tolerances": {
        "gmres_tol": float,
        "gmres_max_iter": int,
        "outer_tol": float,
        "inner_tol": float,
        "max_outer": int,
        "fixed_sweeps": _optional_int,
        "point_tol": float,
        "point_relaxation": float,
        "r_max": int,
        "r": int,
        "birka_tol": float,
        "birka_max_sweeps": int,
        "p_moments": int,
        "q_moments": int,
    },
    "precond": {
        "spai_pattern": SpaiPattern,
        "spai_power": int,
        "fill_tol": float,
        "max_fill_per_col": int,
        "max_pattern_sweeps": int,
        "update_sweeps": _optional_int,
        "max_chain_len": int,
        "kron_nnz_cap": int,
        "diagnostics_max_n": int,
    },
}


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "airga"
    precond: PrecondMode = PrecondMode.REUSE
    reuse_strategy: ReuseStrategy = ReuseStrategy.SEQUENTIAL
    seed: int = 0
    threads: int = 1
    output_dir: Path = Path("runs")
    # file name prefix; empty means the algorithm name
    prefix: str = ""
    error_curve: bool = True

    # generator parameters (used when no matrix files are given)
    n: int = 200
    omega: float = 2.0 * np.pi
    alpha: float = 5e-2
    beta: float = 5e-6
    inputs: int = 1
    matrix_M: Path | None = None
    matrix_D: Path | None = None
    matrix_K: Path | None = None
    matrix_F: Path | None = None
    matrix_C: Path | None = None
    matrix_N: tuple[Path, ...] = ()
    matrix_H: Path | None = None

    expansion_points: tuple[float, ...] = tuple(np.linspace(1.0, 500.0, 4))
    sigmas: tuple[float, ...] = (0.5, 1.0)
    # error-curve grid in Hz, s = 2 pi f
    freq_min: float = 1.0
    freq_max: float = 500.0
    freq_count: int = 100

    gmres_tol: float = 1e-6
    gmres_max_iter: int = 1000
    outer_tol: float = 1e-4
    inner_tol: float = 1e-6
    max_outer: int = 20
    fixed_sweeps: int | None = None
    point_tol: float = 1e-2
    point_relaxation: float = 0.5
    r_max: int = 20
    r: int = 4
    birka_tol: float = 1e-4
    birka_max_sweeps: int = 50
    p_moments: int = 1
    q_moments: int = 1

    spai_pattern: SpaiPattern = SpaiPattern.PATTERN_OF_A
    spai_power: int = 2
    fill_tol: float = 1e-4
    max_fill_per_col: int = 50
    max_pattern_sweeps: int = 3
    # None: update factors use max_pattern_sweeps like a fresh SPAI
    update_sweeps: int | None = None
    max_chain_len: int = 16
    kron_nnz_cap: int = 200_000
    diagnostics_max_n: int = 3000

    @classmethod
    def from_settings(cls, settings) -> RunConfig:
        return cls(
            threads=settings.threads,
            output_dir=settings.output_dir,
            max_chain_len=settings.max_chain_len,
            kron_nnz_cap=settings.kron_nnz_cap,
        )

    def with_sections(self, sections: dict[str, dict[str, str]]) -> RunConfig:
        """Applies a parsed config file; unknown sections or keys are errors."""
        updates: dict[str, Any] = {}
        for section, items in sections.items():
            table = KEYS.get(section)
            if table is None:
                raise ConfigError(f"unknown config section [{section}] (expected one of {', '.join(KEYS)})")
            for key, raw in items.items():
                parser = table.get(key)
                if parser is None:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                try:
                    updates[key] = parser(raw)
                except (ValueError, TypeError) as e:
                    raise ConfigError(f"[{section}] {key} = {raw!r}: {e}")
        return replace(self, **updates)

    def with_overrides(self, **overrides: Any) -> RunConfig:
        """Applies CLI values; None means 'not given'."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown settings: {', '.join(sorted(unknown))}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @property
    def uses_files(self) -> bool:
        return any(
            p is not None
            for p in (self.matrix_M, self.matrix_D, self.matrix_K, self.matrix_F, self.matrix_C, self.matrix_H)
        ) or bool(self.matrix_N)

    @property
    def file_prefix(self) -> str:
        return self.prefix or self.algorithm

    def validate(self) -> RunConfig:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {', '.join(ALGORITHMS)}, got {self.algorithm!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.n < 4:
            raise ConfigError(f"n must be >= 4, got {self.n}")
        if self.inputs < 1:
            raise ConfigError("inputs must be >= 1")
        if not (0 < self.freq_min <= self.freq_max) or self.freq_count < 1:
            raise ConfigError("frequency grid needs 0 < freq_min <= freq_max and freq_count >= 1")
        if self.max_chain_len < 1 or self.kron_nnz_cap < 1 or self.diagnostics_max_n < 0:
            raise ConfigError("max_chain_len and kron_nnz_cap must be >= 1, diagnostics_max_n >= 0")
        if self.update_sweeps is not None and self.update_sweeps < 0:
            raise ConfigError("update_sweeps must be >= 0")
        if self.uses_files:
            required = {
                "airga": ("matrix_M", "matrix_D", "matrix_K", "matrix_F", "matrix_C"),
                "birka": ("matrix_K", "matrix_F", "matrix_C"),
                "qbihomm": ("matrix_D", "matrix_K", "matrix_F", "matrix_C", "matrix_H"),
            }[self.algorithm]
            missing = [k for k in required if getattr(self, k) is None]
            if self.algorithm in ("birka", "qbihomm") and not self.matrix_N:
                missing.append("matrix_N")
            if missing:
                raise ConfigError(f"{self.algorithm} from files needs {', '.join(missing)}")
        # the typed configs carry their own checks
        self.gmres_config()
        self.reuse_settings()
        {"airga": self.airga_config, "birka": self.birka_config, "qbihomm": self.qb_config}[self.algorithm]()
        return self

    def gmres_config(self) -> GmresConfig:
        return GmresConfig(rel_tol=self.gmres_tol, max_iter=self.gmres_max_iter)

    def reuse_settings(self) -> ReuseSettings:
        return ReuseSettings(
            spai=SpaiConfig(
                pattern=self.spai_pattern,
                power=self.spai_power,
                fill_tol=self.fill_tol,
                max_fill_per_col=self.max_fill_per_col,
                max_pattern_sweeps=self.max_pattern_sweeps,
            ),
            update_sweeps=self.update_sweeps,
            strategy=self.reuse_strategy,
            max_chain_len=self.max_chain_len,
            threads=self.threads,
            diagnostics_max_n=self.diagnostics_max_n,
        )

    def airga_config(self) -> AirgaConfig:
        return AirgaConfig(
            expansion_points=self.expansion_points,
            r_max=self.r_max,
            outer_tol=self.outer_tol,
            inner_tol=self.inner_tol,
            max_outer=self.max_outer,
            gmres=self.gmres_config(),
            reuse=self.reuse_settings(),
            fixed_sweeps=self.fixed_sweeps,
            point_tol=self.point_tol,
            point_relaxation=self.point_relaxation,
        )

    def birka_config(self) -> BirkaConfig:
        return BirkaConfig(
            r=self.r,
            tol=self.birka_tol,
            max_sweeps=self.birka_max_sweeps,
            gmres=self.gmres_config(),
            reuse=self.reuse_settings(),
            kron_nnz_cap=self.kron_nnz_cap,
            seed=self.seed,
        )

    def qb_config(self) -> QbConfig:
        return QbConfig(
            sigmas=self.sigmas,
            p_moments=self.p_moments,
            q_moments=self.q_moments,
            reuse=self.precond is PrecondMode.REUSE,
            gmres=self.gmres_config(),
            precond=self.reuse_settings(),
        )

    def frequency_grid(self) -> np.ndarray:
        return np.linspace(self.freq_min, self.freq_max, self.freq_count)
