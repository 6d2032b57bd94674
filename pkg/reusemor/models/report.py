from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime
from typing import Any

from reusemor.models.common import PrecondKind, utcnow


@dataclass
class ReportRow:
    """
    One preconditioner use: all GMRES solves that share the preconditioner
    built (or reused) at coordinates (sweep, point, side) for one solve kind.
    """

    sweep: int
    point: int
    shift: float
    solve_kind: str
    precond_kind: PrecondKind
    side: str = ""
    precond_build_seconds: float = 0.0
    solves: int = 0
    gmres_iterations: int = 0
    gmres_seconds: float = 0.0
    converged: bool = True
    chain_length: int = 0
    # ||A_prev - A_new Q||_f of the update factor built here
    min_residual: float = math.nan
    # ||A_prev - A_new||_f / ||A_prev||_f (horizontal or vertical change)
    change_ratio: float = math.nan
    # ||I - A||_f / ||I||_f
    standard_ratio: float = math.nan
    # ||I - A P||_f / ||I||_f when affordable
    precond_residual: float = math.nan

    def record_solve(self, iterations: int, seconds: float, converged: bool) -> None:
        self.solves += 1
        self.gmres_iterations += int(iterations)
        self.gmres_seconds += float(seconds)
        self.converged = self.converged and bool(converged)

    @property
    def mean_iterations(self) -> float:
        return self.gmres_iterations / self.solves if self.solves else 0.0

    def as_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["precond_kind"] = self.precond_kind.value
        d["mean_iterations"] = self.mean_iterations
        return d

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)] + ["mean_iterations"]


@dataclass
class ReductionReport:
    algorithm: str
    precond_mode: str
    rows: list[ReportRow] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)
    created_at: datetime = field(default_factory=utcnow)

    def add(self, row: ReportRow) -> ReportRow:
        self.rows.append(row)
        return row

    @property
    def failed(self) -> bool:
        return any(not r.converged for r in self.rows)

    def totals(self) -> dict[str, float]:
        return {
            "precond_build_seconds": sum(r.precond_build_seconds for r in self.rows),
            "solves": sum(r.solves for r in self.rows),
            "gmres_iterations": sum(r.gmres_iterations for r in self.rows),
            "gmres_seconds": sum(r.gmres_seconds for r in self.rows),
        }

    def mean_iterations(self) -> float:
        t = self.totals()
        return t["gmres_iterations"] / t["solves"] if t["solves"] else 0.0

    def build_counts(self, side: str | None = None) -> dict[str, int]:
        """How many preconditioners of each kind were constructed (per side if given)."""
        counts: dict[str, int] = {k.value: 0 for k in PrecondKind}
        for r in self.rows:
            if side is not None and r.side != side:
                continue
            counts[r.precond_kind.value] += 1
        return counts

    def sweep_summary(self) -> list[dict[str, Any]]:
        """Per-sweep aggregation: solves, mean iterations, GMRES and preconditioner time."""
        out: list[dict[str, Any]] = []
        for z in sorted({r.sweep for r in self.rows}):
            rows = [r for r in self.rows if r.sweep == z]
            solves = sum(r.solves for r in rows)
            its = sum(r.gmres_iterations for r in rows)
            gmres_s = sum(r.gmres_seconds for r in rows)
            pre_s = sum(r.precond_build_seconds for r in rows)
            out.append(
                {
                    "sweep": z,
                    "solves": solves,
                    "mean_iterations": its / solves if solves else 0.0,
                    "gmres_seconds": gmres_s,
                    "precond_seconds": pre_s,
                    "total_seconds": gmres_s + pre_s,
                }
            )
        return out
