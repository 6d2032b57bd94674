from __future__ import annotations

import argparse
import logging
from pathlib import Path

from reusemor.cli.commands.common import add_run_options, build_config, points
from reusemor.cli.runner import spai_bench
from reusemor.crud.reports import write_table_csv


logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("spai-bench", help="fresh vs reused SPAI along s^2 M + s D + K")
    add_run_options(p)
    p.add_argument("--points", dest="expansion_points", type=points)
    p.add_argument("--omega", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    for name in ("M", "D", "K", "F", "C"):
        p.add_argument(f"--{name}", dest=f"matrix_{name}", type=Path)
    p.set_defaults(func=handle)


def handle(args: argparse.Namespace) -> int:
    keys = ("expansion_points", "omega", "alpha", "beta", "matrix_M", "matrix_D", "matrix_K", "matrix_F", "matrix_C")
    config = build_config(args, "airga", {k: getattr(args, k) for k in keys})
    rows = spai_bench(config)
    prefix = config.prefix or "spai_bench"
    path = write_table_csv(Path(config.output_dir) / f"{prefix}.csv", rows)
    logger.info(f"wrote {path}")
    ok = all(r["fresh_converged"] and r["reuse_converged"] for r in rows)
    return 0 if ok else 3
