from __future__ import annotations

import argparse
from pathlib import Path

from reusemor.cli.commands.common import add_run_options, build_config, points
from reusemor.cli.runner import run


def register(subparsers) -> None:
    p = subparsers.add_parser("airga", help="AIRGA reduction of a second-order system")
    add_run_options(p)
    p.add_argument("--omega", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--points", dest="expansion_points", type=points, help="expansion points, e.g. 1,167,333,500")
    p.add_argument("--r-max", dest="r_max", type=int)
    p.add_argument("--outer-tol", dest="outer_tol", type=float)
    p.add_argument("--inner-tol", dest="inner_tol", type=float)
    p.add_argument("--max-outer", dest="max_outer", type=int)
    p.add_argument("--fixed-sweeps", dest="fixed_sweeps", type=int)
    p.add_argument("--point-tol", dest="point_tol", type=float, help="stop once expansion points move less than this")
    p.add_argument("--point-relaxation", dest="point_relaxation", type=float)
    p.add_argument("--freq-min", dest="freq_min", type=float)
    p.add_argument("--freq-max", dest="freq_max", type=float)
    p.add_argument("--freq-count", dest="freq_count", type=int)
    p.add_argument("--no-error-curve", dest="error_curve", action="store_const", const=False)
    for name in ("M", "D", "K", "F", "C"):
        p.add_argument(f"--{name}", dest=f"matrix_{name}", type=Path, help=f"Matrix Market file for {name}")
    p.set_defaults(func=handle)


def handle(args: argparse.Namespace) -> int:
    keys = (
        "omega", "alpha", "beta", "expansion_points", "r_max", "outer_tol", "inner_tol", "max_outer",
        "fixed_sweeps", "point_tol", "point_relaxation", "freq_min", "freq_max", "freq_count", "error_curve",
        "matrix_M", "matrix_D", "matrix_K", "matrix_F", "matrix_C",
    )
    config = build_config(args, "airga", {k: getattr(args, k) for k in keys})
    result = run(config)
    return 3 if result.report.failed else 0
