"""CSV reports, error curves and reduced-model export."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from reusemor.core.errors import MatrixIOError
from reusemor.crud.matrix_market import write_matrix_market
from reusemor.models.report import ReductionReport, ReportRow


logger = logging.getLogger(__name__)


def _fmt(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    return value


def _write_rows(path: Path, columns: list[str], rows: list[dict[str, Any]]) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _fmt(row.get(k)) for k in columns})
    except OSError as e:
        raise MatrixIOError(f"cannot write CSV: {e.strerror or e}", path=str(path))
    return path


def write_report_csv(report: ReductionReport, path: str | Path) -> Path:
    """One line per report row plus a closing `total` line with column sums."""
    columns = ReportRow.columns()
    rows = [r.as_dict() for r in report.rows]
    totals = report.totals()
    rows.append(
        {
            "sweep": "total",
            "precond_build_seconds": totals["precond_build_seconds"],
            "solves": totals["solves"],
            "gmres_iterations": totals["gmres_iterations"],
            "gmres_seconds": totals["gmres_seconds"],
            "converged": not report.failed,
            "mean_iterations": report.mean_iterations(),
        }
    )
    return _write_rows(Path(path), columns, rows)


def write_sweep_summary_csv(report: ReductionReport, path: str | Path) -> Path:
    summary = report.sweep_summary()
    columns = ["sweep", "solves", "mean_iterations", "gmres_seconds", "precond_seconds", "total_seconds"]
    return _write_rows(Path(path), columns, summary)


def write_error_curve_csv(path: str | Path, freqs, errors) -> Path:
    """(frequency in Hz, s = 2 pi f, relative error) per grid point."""
    f = np.asarray(freqs, dtype=np.float64)
    e = np.asarray(errors, dtype=np.float64)
    rows = [
        {"frequency": float(fk), "s": float(2.0 * np.pi * fk), "relative_error": float(ek)}
        for fk, ek in zip(f, e)
    ]
    return _write_rows(Path(path), ["frequency", "s", "relative_error"], rows)


def write_meta_json(report: ReductionReport, path: str | Path) -> Path:
    p = Path(path)
    payload = {
        "algorithm": report.algorithm,
        "precond_mode": report.precond_mode,
        "created_at": report.created_at.isoformat(),
        "failed": report.failed,
        "totals": report.totals(),
        "build_counts": report.build_counts(),
        **report.meta,
    }
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(payload, indent=2, default=str), encoding="utf-8")
    except OSError as e:
        raise MatrixIOError(f"cannot write metadata: {e.strerror or e}", path=str(p))
    return p


def export_reduced(directory: str | Path, prefix: str, matrices: dict[str, Any]) -> list[Path]:
    """One Matrix Market file `<prefix>_<name>.mtx` per reduced matrix."""
    out_dir = Path(directory)
    written = []
    for name, M in matrices.items():
        written.append(write_matrix_market(out_dir / f"{prefix}_{name}.mtx", M, comment=f"reduced {name}"))
    logger.info(f"exported {len(written)} reduced matrices to {out_dir}")
    return written


def write_table_csv(path: str | Path, rows: list[dict[str, Any]]) -> Path:
    """Plain table with the keys of the first row as header."""
    columns = list(rows[0]) if rows else []
    return _write_rows(Path(path), columns, rows)
