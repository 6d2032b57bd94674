from __future__ import annotations

import argparse
from pathlib import Path

from reusemor.cli.commands.common import add_run_options, build_config, points
from reusemor.cli.runner import run


def register(subparsers) -> None:
    p = subparsers.add_parser("qbihomm", help="QB-IHOMM moment matching for SISO quadratic-bilinear systems")
    add_run_options(p)
    p.add_argument("--sigmas", type=points, help="interpolation points, e.g. 0.5,1")
    p.add_argument("--P", dest="p_moments", type=int)
    p.add_argument("--Q", dest="q_moments", type=int)
    for name in ("D", "K", "N", "H", "F", "C"):
        p.add_argument(f"--{name}", dest=f"matrix_{name}", type=Path)
    p.set_defaults(func=handle)


def handle(args: argparse.Namespace) -> int:
    overrides = {
        k: getattr(args, k)
        for k in ("sigmas", "p_moments", "q_moments", "matrix_D", "matrix_K", "matrix_H", "matrix_F", "matrix_C")
    }
    overrides["matrix_N"] = (args.matrix_N,) if args.matrix_N else None
    result = run(build_config(args, "qbihomm", overrides))
    return 3 if result.report.failed else 0
