import logging
from pathlib import Path

import pytest

from reusemor.cli.commands.common import build_config
from reusemor.core.config import configure_logging, get_settings, read_config_file
from reusemor.core.errors import ConfigError
from reusemor.main import build_parser
from reusemor.models.common import PrecondMode, ReuseStrategy
from reusemor.models.run import RunConfig
from reusemor.models.solver import SpaiPattern


@pytest.fixture(autouse=True)
def clean_env(monkeypatch, tmp_path):
    for name in ("REUSEMOR_THREADS", "REUSEMOR_OUTPUT_DIR", "REUSEMOR_LOG_LEVEL", "REUSEMOR_MAX_CHAIN_LEN", "REUSEMOR_KRON_NNZ_CAP"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("REUSEMOR_THREADS", "3")
    monkeypatch.setenv("REUSEMOR_OUTPUT_DIR", "/tmp/out")
    monkeypatch.setenv("REUSEMOR_LOG_LEVEL", "debug")
    s = get_settings()
    assert s.threads == 3
    assert s.output_dir == Path("/tmp/out")
    assert s.log_level == "DEBUG"
    assert s.max_chain_len == 16 and s.kron_nnz_cap == 200_000


@pytest.mark.parametrize("raw", ["x", "0"])
def test_bad_environment_values(monkeypatch, raw):
    monkeypatch.setenv("REUSEMOR_MAX_CHAIN_LEN", raw)
    with pytest.raises(ConfigError):
        get_settings()


def test_read_config_file(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[points]\nexpansion_points = 1, 2, 3  # Hz\n[tolerances]\nfixed_sweeps = none\n")
    sections = read_config_file(path)
    assert sections == {"points": {"expansion_points": "1, 2, 3"}, "tolerances": {"fixed_sweeps": "none"}}
    config = RunConfig().with_sections(sections)
    assert config.expansion_points == (1.0, 2.0, 3.0)
    assert config.fixed_sweeps is None


def test_read_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.ini")
    bad = tmp_path / "bad.ini"
    bad.write_text("n = 3\n")
    with pytest.raises(ConfigError):
        read_config_file(bad)


@pytest.mark.parametrize(
    "sections",
    [
        {"solver": {"n": "3"}},
        {"model": {"size": "3"}},
        {"model": {"n": "many"}},
        {"run": {"precond": "ilu"}},
        {"run": {"error_curve": "maybe"}},
    ],
)
def test_with_sections_rejects(sections):
    with pytest.raises(ConfigError):
        RunConfig().with_sections(sections)


def test_with_sections_parses_types():
    config = RunConfig().with_sections(
        {
            "run": {"precond": "spai", "reuse_strategy": "anchored", "error_curve": "no"},
            "precond": {"spai_pattern": "diagonal", "update_sweeps": "2"},
            "model": {"matrix_N": "a.mtx, b.mtx"},
        }
    )
    assert config.precond is PrecondMode.FRESH
    assert config.reuse_strategy is ReuseStrategy.ANCHORED
    assert config.error_curve is False
    assert config.spai_pattern is SpaiPattern.DIAGONAL
    assert config.reuse_settings().update_sweeps == 2
    assert config.matrix_N == (Path("a.mtx"), Path("b.mtx"))


@pytest.mark.parametrize(
    "overrides",
    [
        dict(algorithm="pod"),
        dict(n=3),
        dict(threads=0),
        dict(freq_min=10.0, freq_max=1.0),
        dict(matrix_K=Path("k.mtx")),
        dict(algorithm="birka", r=0),
        dict(algorithm="qbihomm", sigmas=(0.0,)),
        dict(expansion_points=(1.0, 2.0), r_max=1),
    ],
)
def test_validate_rejects(overrides):
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(**overrides).validate()


def test_overrides_ignore_none_and_reject_unknown():
    config = RunConfig().with_overrides(n=50, r=None)
    assert config.n == 50 and config.r == 4
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(colour="red")
    assert RunConfig(algorithm="birka").file_prefix == "birka"
    assert RunConfig(prefix="x").file_prefix == "x"


def test_precedence_env_then_file_then_flags(monkeypatch, tmp_path):
    monkeypatch.setenv("REUSEMOR_THREADS", "2")
    monkeypatch.setenv("REUSEMOR_MAX_CHAIN_LEN", "5")
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nthreads = 3\nseed = 7\n")
    parser = build_parser()

    args = parser.parse_args(["airga", "--config", str(cfg)])
    config = build_config(args, "airga", {})
    assert config.threads == 3 and config.seed == 7 and config.max_chain_len == 5

    args = parser.parse_args(["airga", "--config", str(cfg), "--threads", "4"])
    assert build_config(args, "airga", {}).threads == 4


def test_configure_logging_installs_one_handler():
    configure_logging("WARNING")
    configure_logging("DEBUG")
    root = logging.getLogger("reusemor")
    assert root.level == logging.DEBUG
    assert sum(1 for h in root.handlers if getattr(h, "_reusemor", False)) == 1
    with pytest.raises(ConfigError):
        configure_logging("chatty")
