"""
Adaptive iterative rational global Arnoldi (AIRGA) for proportionally
damped second-order systems, with SPAI preconditioners reused across
expansion points (horizontal) and sweeps (vertical).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment

from reusemor.core.errors import ConfigError, GmresFailure, ReductionFailed
from reusemor.linalg.chain import PrecondEvent, PreconditionerFactory
from reusemor.linalg.sparse import as_csr
from reusemor.models.common import Direction, PrecondMode
from reusemor.models.mor import AirgaConfig, ReducedSecondOrder, ReuseSettings
from reusemor.models.report import ReductionReport, ReportRow
from reusemor.models.solver import GmresConfig
from reusemor.models.systems import SecondOrderSystem
from reusemor.mor.common import open_row, reuse_row, solve_columns
from reusemor.mor.h2 import second_order_distance
from reusemor.mor.projection import orthonormalize, project, restrict


logger = logging.getLogger(__name__)


def shifted_operator(sys: SecondOrderSystem, s: float) -> sp.csr_matrix:
    """A(s) = s^2 M + s D + K as one sparse matrix."""
    s = float(s)
    return as_csr(s * s * sys.M + s * sys.D + sys.K)


def galerkin_reduce(sys: SecondOrderSystem, V: np.ndarray, points=()) -> ReducedSecondOrder:
    return ReducedSecondOrder(
        M=project(sys.M, V),
        D=project(sys.D, V),
        K=project(sys.K, V),
        F=restrict(sys.F, V),
        C=restrict(sys.C, V),
        V=V,
        expansion_points=np.asarray(points, dtype=np.float64),
    )


def update_expansion_points(red: ReducedSecondOrder, old_points, *, spacing: float = 1e-6) -> np.ndarray:
    """
    Next expansion points from the reduced quadratic pencil
    lambda^2 M + lambda D + K: the eigenvalues with smallest |Re| give
    s = |Im lambda| (|lambda| when real). Points closer than
    spacing * max are merged; missing points are refilled from old_points.
    """
    old = np.asarray(old_points, dtype=np.float64)
    ell = old.size
    r = red.K.shape[0]
    Z = np.zeros((r, r))
    eye = np.eye(r)
    A = np.block([[Z, eye], [-red.K, -red.D]])
    E = np.block([[eye, Z], [Z, red.M]])
    lam = sla.eigvals(A, E)
    lam = lam[np.isfinite(lam)]

    candidates = []
    for val in lam[np.argsort(np.abs(lam.real), kind="stable")]:
        s = abs(val.imag) if abs(val.imag) > 1e-12 * abs(val) else abs(val)
        if s > 0.0:
            candidates.append(float(s))
    top = max(candidates) if candidates else float(old.max())
    gap = spacing * top

    chosen: list[float] = []
    for s in list(candidates) + [float(s) for s in old]:
        if len(chosen) == ell:
            break
        if all(abs(s - c) > gap for c in chosen):
            chosen.append(s)
    return np.sort(np.asarray(chosen))


@dataclass
class PointRelaxation:
    """
    Damped expansion point update. Each point moves a fraction `steps[i]` of
    the way to the candidate assigned to it, in log(s); the assignment
    minimises the total log distance. A point whose move reverses direction
    has its step halved, so oscillating points settle.
    """

    steps: np.ndarray
    signs: np.ndarray

    @classmethod
    def start(cls, count: int, relaxation: float) -> PointRelaxation:
        return cls(steps=np.full(count, float(relaxation)), signs=np.zeros(count))

    def move(self, old_points, candidates) -> tuple[np.ndarray, float]:
        """New sorted points and the largest relative point movement."""
        old = np.asarray(old_points, dtype=np.float64)
        log_old = np.log(old)
        log_new = np.log(np.asarray(candidates, dtype=np.float64))
        rows, cols = linear_sum_assignment(np.abs(log_old[:, None] - log_new[None, :]))
        # points left without a candidate stay put
        target = log_old.copy()
        target[rows] = log_new[cols]
        delta = target - log_old
        sign = np.sign(delta)
        self.steps = np.where(sign * self.signs < 0, 0.5 * self.steps, self.steps)
        self.signs = np.where(sign != 0, sign, self.signs)
        moved = np.exp(log_old + self.steps * delta)
        movement = float(np.max(np.abs(moved - old) / old))
        order = np.argsort(moved, kind="stable")
        self.steps = self.steps[order]
        self.signs = self.signs[order]
        return moved[order], movement


@dataclass
class _PointState:
    index: int
    shift: float
    A: sp.csr_matrix
    event: PrecondEvent
    own: np.ndarray
    block: np.ndarray
    moment_row: ReportRow | None = None


@dataclass
class _Solver:
    cfg: GmresConfig
    report: ReductionReport

    def __call__(self, A, event: PrecondEvent, rhs, row: ReportRow, coords: tuple[int, int, int]) -> np.ndarray:
        try:
            return solve_columns(A, event, rhs, self.cfg, row)
        except GmresFailure as e:
            z, i, j = coords
            raise ReductionFailed(
                f"GMRES failed at sweep {z}, point {i}, moment {j}: {e}",
                coords=coords,
                report=self.report,
            ) from e


def airga_reduce(
    sys: SecondOrderSystem,
    cfg: AirgaConfig | None = None,
    precond_mode: PrecondMode | str = PrecondMode.REUSE,
) -> tuple[ReducedSecondOrder, ReductionReport]:
    """
    Each sweep solves for the zeroth moments A_i^{-1} F at every expansion
    point, then adds higher moments -A_i^{-1} M V_j with the same
    preconditioner until consecutive temporary models agree in H2 or r_max
    columns are reached. Sweeps repeat with updated points until two
    consecutive reduced models agree to outer_tol.
    """
    cfg = cfg or AirgaConfig()
    mode = PrecondMode.parse(precond_mode)
    factory = PreconditionerFactory(mode, cfg.reuse)
    report = ReductionReport(algorithm="airga", precond_mode=mode.value)
    solve = _Solver(cfg.gmres, report)
    F = sys.F.toarray()

    points = cfg.points.copy()
    sweeps = cfg.fixed_sweeps if cfg.fixed_sweeps is not None else cfg.max_outer
    relaxation = PointRelaxation.start(points.size, cfg.point_relaxation)
    vertical: tuple | None = None
    prev_red: ReducedSecondOrder | None = None
    red: ReducedSecondOrder | None = None
    outer_distances: list[float] = []
    point_moves: list[float] = []
    stop_reason: str | None = None

    for z in range(1, sweeps + 1):
        logger.info(f"AIRGA sweep {z}: expansion points {np.array2string(points, precision=4)}")
        states: list[_PointState] = []
        V = np.zeros((sys.n, 0))

        for i, s in enumerate(points, start=1):
            A = shifted_operator(sys, s)
            if i == 1:
                if vertical is None:
                    event = factory.fresh(A)
                else:
                    event = factory.next(
                        A,
                        prev_chain=vertical[0],
                        A_prev=vertical[1],
                        direction=Direction.VERTICAL,
                        from_index=(z - 1, 1),
                        to_index=(z, 1),
                    )
            else:
                prev = states[-1]
                event = factory.next(
                    A,
                    prev_chain=prev.event.chain,
                    A_prev=prev.A,
                    direction=Direction.HORIZONTAL,
                    from_index=(z, i - 1),
                    to_index=(z, i),
                )
            row = report.add(open_row(event, sweep=z, point=i, shift=s, solve_kind="zeroth"))
            X0 = solve(A, event, F, row, (z, i, 0))
            own = orthonormalize(X0, rank_tol=cfg.rank_tol)
            states.append(_PointState(index=i, shift=float(s), A=A, event=event, own=own, block=own))

        # one Frobenius-normalised block over all points, then orthonormalised
        zeroth = np.hstack([st.own for st in states])
        scale = np.linalg.norm(zeroth)
        V = orthonormalize(zeroth / scale if scale > 0 else zeroth, rank_tol=cfg.rank_tol, max_new=cfg.r_max)

        temp_prev = galerkin_reduce(sys, V, points)
        inner_converged = False
        j = 0
        while V.shape[1] < cfg.r_max:
            j += 1
            added = 0
            for st in states:
                room = cfg.r_max - V.shape[1]
                if st.block.shape[1] == 0 or room <= 0:
                    continue
                if st.moment_row is None:
                    st.moment_row = report.add(
                        reuse_row(st.event, sweep=z, point=st.index, shift=st.shift, solve_kind="moment")
                    )
                X = -solve(st.A, st.event, sys.M @ st.block, st.moment_row, (z, st.index, j))
                fresh_cols = orthonormalize(X, st.own, rank_tol=cfg.rank_tol)
                st.own = np.hstack([st.own, fresh_cols])
                st.block = fresh_cols
                new = orthonormalize(fresh_cols, V, rank_tol=cfg.rank_tol, max_new=room)
                V = np.hstack([V, new])
                added += new.shape[1]
            if added == 0:
                logger.debug(f"sweep {z}: Krylov spaces exhausted after {j - 1} moment steps")
                inner_converged = True
                break
            temp = galerkin_reduce(sys, V, points)
            dist = second_order_distance(temp, temp_prev)
            logger.debug(f"sweep {z} moment step {j}: r={V.shape[1]} inner H2 change {dist:.3e}")
            temp_prev = temp
            if dist < cfg.inner_tol:
                inner_converged = True
                break
        if not inner_converged:
            logger.warning(f"sweep {z}: r_max={cfg.r_max} reached before the inner loop converged; keeping the basis")

        red = galerkin_reduce(sys, V, points)
        if prev_red is not None:
            dist = second_order_distance(red, prev_red)
            outer_distances.append(dist)
            logger.info(f"sweep {z}: r={red.r}, H2 change {dist:.3e}")
            if cfg.fixed_sweeps is None and dist < cfg.outer_tol:
                stop_reason = "h2"
                break
        else:
            logger.info(f"sweep {z}: r={red.r}")
        prev_red = red
        vertical = (states[0].event.chain, states[0].A)
        if z < sweeps:
            new_points, movement = relaxation.move(points, update_expansion_points(red, points))
            point_moves.append(movement)
            logger.debug(f"sweep {z}: largest relative point movement {movement:.3e}")
            if cfg.fixed_sweeps is None and z >= 2 and movement < cfg.point_tol:
                stop_reason = "points"
                break
            points = new_points

    if red is None:
        raise ConfigError("AIRGA ran no sweep; max_outer and fixed_sweeps must be >= 1")
    converged = stop_reason is not None
    if not converged and cfg.fixed_sweeps is None:
        logger.warning(f"AIRGA stopped after {cfg.max_outer} sweeps without reaching outer_tol={cfg.outer_tol} or point_tol={cfg.point_tol}")
    report.meta.update(
        {
            "r": red.r,
            "sweeps": max(r.sweep for r in report.rows),
            "converged": converged,
            "stop_reason": stop_reason,
            "point_moves": point_moves,
            "final_points": [float(s) for s in red.expansion_points],
            "outer_h2": outer_distances,
            "fresh_builds": factory.fresh_builds,
            "update_builds": factory.update_builds,
        }
    )
    return red, report


def transfer_function(
    sys: SecondOrderSystem,
    s: float,
    *,
    event: PrecondEvent | None = None,
    cfg: GmresConfig | None = None,
) -> np.ndarray:
    """H(s) = C^T (s^2 M + s D + K)^{-1} F by GMRES, q x m."""
    A = shifted_operator(sys, s)
    event = event or PreconditionerFactory(PrecondMode.FRESH).fresh(A)
    row = ReportRow(sweep=0, point=0, shift=s, solve_kind="transfer", precond_kind=event.kind)
    X = solve_columns(A, event, sys.F.toarray(), cfg or GmresConfig(), row)
    return sys.C.T @ X


def transfer_function_error(
    sys: SecondOrderSystem,
    red: ReducedSecondOrder,
    grid,
    *,
    precond_mode: PrecondMode | str = PrecondMode.REUSE,
    gmres: GmresConfig | None = None,
    reuse: ReuseSettings | None = None,
    report: ReductionReport | None = None,
) -> np.ndarray:
    """
    ||H(s) - H_hat(s)|| / ||H(s)|| for every s in grid (2-norm). The full
    model is solved by GMRES with a horizontal preconditioner chain along the
    grid; points where either solve fails are returned as NaN.
    """
    s_values = np.atleast_1d(np.asarray(grid, dtype=np.float64))
    if s_values.size == 0 or not np.all(np.isfinite(s_values)) or np.any(s_values <= 0):
        raise ConfigError("frequency grid must be non-empty, finite and positive")
    cfg = gmres or GmresConfig()
    factory = PreconditionerFactory(PrecondMode.parse(precond_mode), reuse or ReuseSettings())
    F = sys.F.toarray()
    C = sys.C.toarray()

    out = np.full(s_values.size, math.nan)
    prev: tuple | None = None
    for k, s in enumerate(s_values):
        A = shifted_operator(sys, s)
        if prev is None:
            event = factory.fresh(A)
        else:
            event = factory.next(
                A,
                prev_chain=prev[0],
                A_prev=prev[1],
                direction=Direction.HORIZONTAL,
                from_index=(0, k),
                to_index=(0, k + 1),
            )
        prev = (event.chain, A)
        row = open_row(event, sweep=0, point=k + 1, shift=s, solve_kind="error-curve")
        if report is not None:
            report.add(row)
        try:
            H = C.T @ solve_columns(A, event, F, cfg, row)
        except GmresFailure as e:
            logger.warning(f"transfer function at s={s:g} not computed ({e}); flagged as NaN")
            continue
        try:
            Hr = red.transfer(s)
        except np.linalg.LinAlgError:
            logger.warning(f"reduced model is singular at s={s:g}; flagged as NaN")
            continue
        nrm = np.linalg.norm(H, 2)
        diff = np.linalg.norm(H - Hr, 2)
        out[k] = diff / nrm if nrm > 0 else diff
    return out
