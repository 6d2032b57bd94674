from __future__ import annotations

import argparse
from pathlib import Path

from reusemor.cli.commands.common import add_run_options, build_config
from reusemor.cli.runner import run


def register(subparsers) -> None:
    p = subparsers.add_parser("birka", help="bilinear IRKA with Kronecker-structured solves")
    add_run_options(p)
    p.add_argument("--r", type=int, help="reduced order")
    p.add_argument("--tol", dest="birka_tol", type=float, help="relative eigenvalue change to stop at")
    p.add_argument("--max-sweeps", dest="birka_max_sweeps", type=int)
    p.add_argument("--inputs", type=int, help="number of inputs of the generated model")
    p.add_argument("--kron-nnz-cap", dest="kron_nnz_cap", type=int)
    p.add_argument("--K", dest="matrix_K", type=Path)
    p.add_argument("--N", dest="matrix_N", type=Path, nargs="+", help="one file per input")
    p.add_argument("--F", dest="matrix_F", type=Path)
    p.add_argument("--C", dest="matrix_C", type=Path)
    p.set_defaults(func=handle)


def handle(args: argparse.Namespace) -> int:
    overrides = {
        k: getattr(args, k)
        for k in ("r", "birka_tol", "birka_max_sweeps", "inputs", "kron_nnz_cap", "matrix_K", "matrix_F", "matrix_C")
    }
    overrides["matrix_N"] = tuple(args.matrix_N) if args.matrix_N else None
    result = run(build_config(args, "birka", overrides))
    return 3 if result.report.failed else 0
