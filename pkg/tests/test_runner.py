import csv
import json

import numpy as np
import pytest

from reusemor.cli.runner import run, spai_bench
from reusemor.core.errors import ReductionFailed
from reusemor.main import main
from reusemor.models.common import PrecondKind, PrecondMode
from reusemor.models.mor import AirgaConfig
from reusemor.models.run import RunConfig
from reusemor.models.solver import GmresConfig
from reusemor.mor.airga import airga_reduce, transfer_function_error
from reusemor.mor.generators import generate_disc_brake_like
from reusemor.mor.h2 import second_order_distance


@pytest.fixture(autouse=True)
def quiet_env(monkeypatch, tmp_path):
    monkeypatch.delenv("REUSEMOR_OUTPUT_DIR", raising=False)
    monkeypatch.delenv("REUSEMOR_THREADS", raising=False)
    monkeypatch.chdir(tmp_path)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_airga_writes_all_outputs(tmp_path):
    config = RunConfig(
        n=30, expansion_points=(1.0, 10.0), r_max=4, fixed_sweeps=1, freq_count=5, output_dir=tmp_path / "out"
    )
    result = run(config)
    out = tmp_path / "out"
    for name in ("airga_report.csv", "airga_sweeps.csv", "airga_meta.json", "airga_error.csv", "airga_K.mtx"):
        assert (out / name).exists(), name
    assert result.reduced.r <= 4
    errors = _rows(out / "airga_error.csv")
    assert len(errors) == 5
    meta = json.loads((out / "airga_meta.json").read_text())
    assert meta["algorithm"] == "airga" and meta["precond_mode"] == "reuse"
    assert "max_relative_error" in meta


def test_run_birka_and_qbihomm(tmp_path):
    birka = run(RunConfig(algorithm="birka", n=12, r=2, birka_max_sweeps=2, output_dir=tmp_path))
    assert (tmp_path / "birka_N1.mtx").exists()
    assert birka.report.meta["sweeps"] <= 2
    qb = run(RunConfig(algorithm="qbihomm", n=12, sigmas=(0.5, 1.0), output_dir=tmp_path, prefix="qb"))
    assert (tmp_path / "qb_H.mtx").exists()
    assert len(_rows(tmp_path / "qb_report.csv")) == 4 + 1


def test_failed_run_leaves_partial_report(tmp_path):
    config = RunConfig(
        algorithm="qbihomm", n=30, precond=PrecondMode.NONE, gmres_tol=1e-14, gmres_max_iter=1, output_dir=tmp_path
    )
    with pytest.raises(ReductionFailed):
        run(config)
    rows = _rows(tmp_path / "qbihomm_report.csv")
    assert rows[0]["converged"] == "False"


def test_spai_bench_rows():
    rows = spai_bench(RunConfig(n=25, expansion_points=(1.0, 5.0, 10.0)))
    assert [r["reuse_kind"] for r in rows] == ["fresh", "horizontal", "horizontal"]
    assert all(r["fresh_converged"] and r["reuse_converged"] for r in rows)
    assert rows[2]["chain_length"] == 2


def test_main_subcommands(tmp_path):
    out = str(tmp_path)
    assert main(["--quiet", "airga", "--n", "20", "--points", "1,10", "--r-max", "4", "--fixed-sweeps", "1",
                 "--freq-count", "3", "--output-dir", out]) == 0
    assert main(["--quiet", "spai-bench", "--n", "20", "--points", "1,5", "--output-dir", out]) == 0
    assert (tmp_path / "spai_bench.csv").exists()


def test_main_generated_files_round_trip(tmp_path):
    gen_dir = tmp_path / "gen"
    assert main(["--quiet", "gen", "qb", "--n", "6", "--output-dir", str(gen_dir)]) == 0
    files = {name: str(gen_dir / f"qb_{name}.mtx") for name in ("D", "K", "N", "H", "F", "C")}
    argv = ["--quiet", "qbihomm", "--output-dir", str(tmp_path / "run"), "--sigmas", "1"]
    for name, path in files.items():
        argv += [f"--{name}", path]
    assert main(argv) == 0
    assert (tmp_path / "run" / "qbihomm_K.mtx").exists()


def test_main_exit_codes(tmp_path):
    out = str(tmp_path)
    assert main(["--quiet", "airga", "--n", "2", "--output-dir", out]) == 2
    assert main(["--quiet", "airga", "--n", "20", "--fixed-sweeps", "-1", "--output-dir", out]) == 2
    assert main(["--quiet", "airga", "--n", "20", "--fixed-sweeps", "0", "--output-dir", out]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nflavour = sweet\n")
    assert main(["--quiet", "airga", "--config", str(bad)]) == 2
    missing = ["--M", "m.mtx", "--D", "d.mtx", "--K", "k.mtx", "--F", "f.mtx", "--C", "c.mtx"]
    assert main(["--quiet", "airga", "--output-dir", out, *missing]) == 4
    assert main(["--quiet", "qbihomm", "--n", "30", "--precond", "none", "--gmres-tol", "1e-14",
                 "--gmres-max-iter", "1", "--output-dir", out]) == 3


# acceptance-scale checks on a generated disc-brake-like model


@pytest.fixture(scope="module")
def large_runs():
    sys = generate_disc_brake_like(2000, seed=0)
    cfg = AirgaConfig(r_max=20, fixed_sweeps=2, gmres=GmresConfig(rel_tol=1e-6, max_iter=1000))
    fresh = airga_reduce(sys, cfg, PrecondMode.FRESH)
    reuse = airga_reduce(sys, cfg, PrecondMode.REUSE)
    return sys, cfg, fresh, reuse


@pytest.mark.slow
def test_reuse_halves_preconditioner_time(large_runs):
    _, _, (_, fresh), (_, reuse) = large_runs
    assert reuse.totals()["precond_build_seconds"] <= 0.5 * fresh.totals()["precond_build_seconds"]
    assert reuse.mean_iterations() <= 1.5 * fresh.mean_iterations()
    assert not fresh.failed and not reuse.failed
    assert any(r.precond_kind is PrecondKind.VERTICAL for r in reuse.rows)


@pytest.mark.slow
def test_unpreconditioned_gmres_fails(large_runs):
    sys, cfg, _, _ = large_runs
    with pytest.raises(ReductionFailed):
        airga_reduce(sys, cfg, PrecondMode.NONE)


@pytest.mark.slow
def test_reused_and_fresh_models_agree(large_runs):
    _, _, (red_fresh, _), (red_reuse, _) = large_runs
    assert second_order_distance(red_reuse, red_fresh) <= 1e-6


@pytest.mark.slow
def test_error_small_at_final_expansion_points(large_runs):
    sys, cfg, _, (red, _) = large_runs
    errors = transfer_function_error(sys, red, red.expansion_points, gmres=GmresConfig(rel_tol=1e-10))
    assert np.all(errors <= 1e-4)


@pytest.fixture(scope="module")
def converged_run():
    sys = generate_disc_brake_like(2000, seed=0)
    cfg = AirgaConfig(r_max=20, gmres=GmresConfig(rel_tol=1e-6, max_iter=1000))
    red, report = airga_reduce(sys, cfg, PrecondMode.REUSE)
    return sys, cfg, red, report


@pytest.mark.slow
def test_adaptive_run_converges_before_max_outer(converged_run):
    _, cfg, _, report = converged_run
    assert report.meta["converged"] is True
    assert report.meta["sweeps"] < cfg.max_outer
    assert not report.failed


@pytest.mark.slow
def test_error_curve_is_smallest_near_a_final_expansion_point(converged_run):
    sys, _, red, _ = converged_run
    freqs = RunConfig().frequency_grid()
    s_grid = 2.0 * np.pi * freqs
    errors = transfer_function_error(sys, red, s_grid, gmres=GmresConfig(rel_tol=1e-10))
    assert np.all(np.isfinite(errors))
    best = s_grid[int(np.argmin(errors))]
    step = s_grid[1] - s_grid[0]
    assert np.min(np.abs(red.expansion_points - best)) <= step

    at_points = transfer_function_error(sys, red, red.expansion_points, gmres=GmresConfig(rel_tol=1e-10))
    assert np.all(at_points <= 1e-4)
