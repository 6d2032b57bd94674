"""
Runs one reduction end to end: builds or reads the model, reduces it, and
writes the report, sweep summary, metadata, reduced matrices and (AIRGA)
the error curve under the output directory.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from reusemor.core.errors import GmresFailure, ReductionFailed
from reusemor.core.timing import stopwatch
from reusemor.crud.matrix_market import read_matrix_market
from reusemor.crud.reports import (
    export_reduced,
    write_error_curve_csv,
    write_meta_json,
    write_report_csv,
    write_sweep_summary_csv,
)
from reusemor.linalg.chain import PreconditionerFactory
from reusemor.linalg.gmres import gmres_right_preconditioned
from reusemor.models.common import Direction, PrecondMode
from reusemor.models.report import ReductionReport
from reusemor.models.run import RunConfig
from reusemor.models.systems import BilinearSystem, QbSystem, SecondOrderSystem
from reusemor.mor.airga import airga_reduce, shifted_operator, transfer_function_error
from reusemor.mor.birka import birka_reduce
from reusemor.mor.generators import generate_bilinear_toy, generate_disc_brake_like, generate_qb_toy
from reusemor.mor.qbihomm import qbihomm_reduce


logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    report: ReductionReport
    reduced: Any = None
    files: list[Path] = field(default_factory=list)


def load_second_order(config: RunConfig) -> SecondOrderSystem:
    if config.uses_files:
        return SecondOrderSystem(
            M=read_matrix_market(config.matrix_M),
            D=read_matrix_market(config.matrix_D),
            K=read_matrix_market(config.matrix_K),
            F=read_matrix_market(config.matrix_F),
            C=read_matrix_market(config.matrix_C),
        )
    return generate_disc_brake_like(config.n, config.omega, config.alpha, config.beta, config.seed)


def load_bilinear(config: RunConfig) -> BilinearSystem:
    if config.uses_files:
        return BilinearSystem(
            K=read_matrix_market(config.matrix_K),
            N=tuple(read_matrix_market(p) for p in config.matrix_N),
            F=read_matrix_market(config.matrix_F),
            C=read_matrix_market(config.matrix_C),
        )
    return generate_bilinear_toy(config.n, m=config.inputs, seed=config.seed)


def load_qb(config: RunConfig) -> QbSystem:
    if config.uses_files:
        return QbSystem(
            D=read_matrix_market(config.matrix_D),
            K=read_matrix_market(config.matrix_K),
            N=read_matrix_market(config.matrix_N[0]),
            H=read_matrix_market(config.matrix_H),
            F=read_matrix_market(config.matrix_F),
            C=read_matrix_market(config.matrix_C),
        )
    return generate_qb_toy(config.n, seed=config.seed)


def _write_report(report: ReductionReport, out: Path, prefix: str) -> list[Path]:
    return [
        write_report_csv(report, out / f"{prefix}_report.csv"),
        write_sweep_summary_csv(report, out / f"{prefix}_sweeps.csv"),
        write_meta_json(report, out / f"{prefix}_meta.json"),
    ]


def run(config: RunConfig) -> RunResult:
    config.validate()
    out = Path(config.output_dir)
    prefix = config.file_prefix
    logger.info(f"{config.algorithm}: precond={config.precond.value}, output {out}/{prefix}_*")

    try:
        if config.algorithm == "airga":
            result = _run_airga(config, out, prefix)
        elif config.algorithm == "birka":
            system = load_bilinear(config)
            state, report = birka_reduce(system, config.birka_config(), precond_mode=config.precond)
            mats = {"K": state.K, "F": state.F, "C": state.C}
            mats.update({f"N{j + 1}": Nj for j, Nj in enumerate(state.N)})
            result = RunResult(report=report, reduced=state, files=export_reduced(out, prefix, mats))
        else:
            system = load_qb(config)
            red, report = qbihomm_reduce(system, config.qb_config(), precond_mode=config.precond)
            mats = {"D": red.D, "K": red.K, "N": red.N, "H": red.H, "F": red.F, "C": red.C}
            result = RunResult(report=report, reduced=red, files=export_reduced(out, prefix, mats))
    except ReductionFailed as e:
        if e.report is not None:
            _write_report(e.report, out, prefix)
            logger.info(f"partial report written to {out}/{prefix}_report.csv")
        raise

    result.files.extend(_write_report(result.report, out, prefix))
    totals = result.report.totals()
    logger.info(
        f"done: {int(totals['solves'])} solves, {result.report.mean_iterations():.1f} mean GMRES iterations, "
        f"precond {totals['precond_build_seconds']:.3f}s, GMRES {totals['gmres_seconds']:.3f}s"
    )
    return result


def _run_airga(config: RunConfig, out: Path, prefix: str) -> RunResult:
    system = load_second_order(config)
    red, report = airga_reduce(system, config.airga_config(), config.precond)
    files = export_reduced(out, prefix, {"M": red.M, "D": red.D, "K": red.K, "F": red.F, "C": red.C})
    if config.error_curve:
        freqs = config.frequency_grid()
        # the unpreconditioned error curve would only repeat the GMRES failures
        mode = PrecondMode.REUSE if config.precond is PrecondMode.NONE else config.precond
        errors = transfer_function_error(
            system,
            red,
            2.0 * np.pi * freqs,
            precond_mode=mode,
            gmres=config.gmres_config(),
            reuse=config.reuse_settings(),
        )
        files.append(write_error_curve_csv(out / f"{prefix}_error.csv", freqs, errors))
        finite = errors[np.isfinite(errors)]
        report.meta["max_relative_error"] = float(finite.max()) if finite.size else math.nan
    return RunResult(report=report, reduced=red, files=files)


def spai_bench(config: RunConfig) -> list[dict[str, Any]]:
    """
    Fresh SPAI versus reuse along A_i = s_i^2 M + s_i D + K: build time,
    GMRES iterations on A_i x = F and the update residual per point.
    """
    config.validate()
    system = load_second_order(config)
    settings = config.reuse_settings()
    gmres = config.gmres_config()
    fresh = PreconditionerFactory(PrecondMode.FRESH, settings)
    reuse = PreconditionerFactory(PrecondMode.REUSE, settings)
    b = system.F.toarray()[:, 0]

    def iterations(A, event) -> tuple[int, bool]:
        try:
            _, rep = gmres_right_preconditioned(A, event.operator(), b, gmres)
            return rep.iterations, True
        except GmresFailure as e:
            return (e.report.iterations if e.report is not None else gmres.max_iter), False

    rows: list[dict[str, Any]] = []
    prev = None
    with stopwatch() as total:
        for i, s in enumerate(config.expansion_points, start=1):
            A = shifted_operator(system, s)
            ev_fresh = fresh.fresh(A)
            if prev is None:
                ev_reuse = reuse.fresh(A)
            else:
                ev_reuse = reuse.next(
                    A,
                    prev_chain=prev[0],
                    A_prev=prev[1],
                    direction=Direction.HORIZONTAL,
                    from_index=(1, i - 1),
                    to_index=(1, i),
                )
            prev = (ev_reuse.chain, A)
            it_fresh, ok_fresh = iterations(A, ev_fresh)
            it_reuse, ok_reuse = iterations(A, ev_reuse)
            rows.append(
                {
                    "point": i,
                    "shift": float(s),
                    "fresh_seconds": ev_fresh.build_seconds,
                    "fresh_iterations": it_fresh,
                    "fresh_converged": ok_fresh,
                    "reuse_kind": ev_reuse.kind.value,
                    "reuse_seconds": ev_reuse.build_seconds,
                    "reuse_iterations": it_reuse,
                    "reuse_converged": ok_reuse,
                    "chain_length": ev_reuse.chain_length,
                    "min_residual": ev_reuse.min_residual,
                    "change_ratio": ev_reuse.change_ratio,
                    "standard_ratio": ev_reuse.standard_ratio,
                }
            )
    logger.info(f"spai-bench: {len(rows)} points in {total.seconds:.2f}s")
    return rows
