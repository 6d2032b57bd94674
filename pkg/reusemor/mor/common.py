from __future__ import annotations

import logging

import numpy as np

from reusemor.core.errors import GmresFailure
from reusemor.linalg.chain import PrecondEvent
from reusemor.linalg.gmres import gmres_right_preconditioned
from reusemor.models.common import PrecondKind
from reusemor.models.report import ReportRow
from reusemor.models.solver import GmresConfig


logger = logging.getLogger(__name__)


def open_row(event: PrecondEvent, *, sweep: int, point: int, shift: float, solve_kind: str, side: str = "") -> ReportRow:
    """Report row for the solves served by a freshly obtained preconditioner."""
    return ReportRow(
        sweep=sweep,
        point=point,
        shift=float(shift),
        solve_kind=solve_kind,
        side=side,
        precond_kind=event.kind,
        precond_build_seconds=event.build_seconds,
        chain_length=event.chain_length,
        min_residual=event.min_residual,
        change_ratio=event.change_ratio,
        standard_ratio=event.standard_ratio,
        precond_residual=event.precond_residual,
    )


def reuse_row(event: PrecondEvent, *, sweep: int, point: int, shift: float, solve_kind: str, side: str = "") -> ReportRow:
    """Row for further solves with an unchanged matrix: nothing is built."""
    kind = PrecondKind.NONE if event.chain is None else PrecondKind.SAME_MATRIX
    return ReportRow(
        sweep=sweep,
        point=point,
        shift=float(shift),
        solve_kind=solve_kind,
        side=side,
        precond_kind=kind,
        chain_length=event.chain_length,
        standard_ratio=event.standard_ratio,
    )


def solve_columns(A, event: PrecondEvent, rhs: np.ndarray, cfg: GmresConfig, row: ReportRow) -> np.ndarray:
    """
    GMRES on every column of rhs with the event's preconditioner.

    Every solve is recorded on `row`; a failure marks the row and re-raises.
    """
    B = np.asarray(rhs, dtype=np.float64)
    if B.ndim == 1:
        B = B[:, None]
    X = np.zeros_like(B)
    P = event.operator()
    for k in range(B.shape[1]):
        try:
            x, rep = gmres_right_preconditioned(A, P, B[:, k], cfg)
        except GmresFailure as e:
            rep = e.report
            if rep is not None:
                row.record_solve(rep.iterations, rep.solve_seconds, False)
            else:
                row.converged = False
            raise
        row.record_solve(rep.iterations, rep.solve_seconds, True)
        X[:, k] = x
    return X
