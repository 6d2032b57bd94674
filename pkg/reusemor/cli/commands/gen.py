from __future__ import annotations

import argparse
import logging
import math
from pathlib import Path

from reusemor.core.config import get_settings
from reusemor.crud.matrix_market import write_matrix_market
from reusemor.mor.generators import generate_bilinear_toy, generate_disc_brake_like, generate_qb_toy


logger = logging.getLogger(__name__)

KINDS = ("disc-brake", "bilinear", "qb")


def register(subparsers) -> None:
    p = subparsers.add_parser("gen", help="write a generated model as Matrix Market files")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--omega", type=float, default=2.0 * math.pi)
    p.add_argument("--alpha", type=float, default=5e-2)
    p.add_argument("--beta", type=float, default=5e-6)
    p.add_argument("--inputs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", dest="output_dir", type=Path)
    p.add_argument("--prefix", default="")
    p.set_defaults(func=handle)


def handle(args: argparse.Namespace) -> int:
    out = args.output_dir or get_settings().output_dir
    prefix = args.prefix or args.kind.replace("-", "_")
    if args.kind == "disc-brake":
        sys = generate_disc_brake_like(args.n, args.omega, args.alpha, args.beta, args.seed)
        mats = {"M": sys.M, "D": sys.D, "K": sys.K, "F": sys.F, "C": sys.C}
    elif args.kind == "bilinear":
        sys = generate_bilinear_toy(args.n, m=args.inputs, seed=args.seed)
        mats = {"K": sys.K, "F": sys.F, "C": sys.C}
        mats.update({f"N{j + 1}": Nj for j, Nj in enumerate(sys.N)})
    else:
        sys = generate_qb_toy(args.n, seed=args.seed)
        mats = {"D": sys.D, "K": sys.K, "N": sys.N, "H": sys.H, "F": sys.F, "C": sys.C}
    for name, M in mats.items():
        path = write_matrix_market(Path(out) / f"{prefix}_{name}.mtx", M, comment=f"{args.kind} n={args.n} seed={args.seed}")
        logger.info(f"wrote {path}")
    return 0
