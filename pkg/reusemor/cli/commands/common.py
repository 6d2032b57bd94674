from __future__ import annotations

import argparse
from pathlib import Path
from typing import Any

from reusemor.core.config import get_settings, read_config_file
from reusemor.models.common import PrecondMode, ReuseStrategy
from reusemor.models.run import RunConfig


def points(raw: str) -> tuple[float, ...]:
    try:
        values = tuple(float(p) for p in raw.replace(",", " ").split() if p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma separated list of numbers, got {raw!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def add_run_options(p: argparse.ArgumentParser) -> None:
    """Flags shared by every reduction subcommand."""
    p.add_argument("--config", type=Path, help="sectioned key = value run file")
    p.add_argument("--precond", type=PrecondMode.parse, choices=list(PrecondMode), help="none | spai | reuse")
    p.add_argument("--reuse-strategy", dest="reuse_strategy", type=ReuseStrategy, choices=list(ReuseStrategy))
    p.add_argument("--update-sweeps", dest="update_sweeps", type=int, help="augmentation sweeps for update factors (default: as for a fresh SPAI; 0 keeps the initial pattern)")
    p.add_argument("--max-chain-len", dest="max_chain_len", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir", dest="output_dir", type=Path)
    p.add_argument("--prefix")
    p.add_argument("--gmres-tol", dest="gmres_tol", type=float)
    p.add_argument("--gmres-max-iter", dest="gmres_max_iter", type=int)
    p.add_argument("--n", type=int, help="size of the generated model")


def build_config(args: argparse.Namespace, algorithm: str, overrides: dict[str, Any]) -> RunConfig:
    """Settings (env) < --config file < flags."""
    config = RunConfig.from_settings(get_settings())
    if getattr(args, "config", None) is not None:
        config = config.with_sections(read_config_file(args.config))
    shared = {
        key: getattr(args, key, None)
        for key in (
            "precond",
            "reuse_strategy",
            "update_sweeps",
            "max_chain_len",
            "threads",
            "seed",
            "output_dir",
            "prefix",
            "gmres_tol",
            "gmres_max_iter",
            "n",
        )
    }
    return config.with_overrides(algorithm=algorithm, **shared, **overrides).validate()
