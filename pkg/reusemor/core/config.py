from __future__ import annotations

import configparser
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

from reusemor.core.errors import ConfigError


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class Settings:
    output_dir: Path
    threads: int
    log_level: str
    max_chain_len: int
    kron_nnz_cap: int


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise ConfigError(f"{name} must be >= 1, got {value}")
    return value


def get_settings() -> Settings:
    """
    Loads environment variables from a local .env file if present.
    """
    load_dotenv(override=False)

    output_dir = Path(os.getenv("REUSEMOR_OUTPUT_DIR") or (Path.cwd() / "runs"))

    return Settings(
        output_dir=output_dir,
        threads=_env_int("REUSEMOR_THREADS", 1),
        log_level=(os.getenv("REUSEMOR_LOG_LEVEL") or "INFO").upper(),
        max_chain_len=_env_int("REUSEMOR_MAX_CHAIN_LEN", 16),
        kron_nnz_cap=_env_int("REUSEMOR_KRON_NNZ_CAP", 200_000),
    )


def configure_logging(level: str | int = "INFO") -> None:
    root = logging.getLogger("reusemor")
    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            raise ConfigError(f"Unknown log level {level!r}")
        level = resolved
    root.setLevel(level)
    if not any(getattr(h, "_reusemor", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._reusemor = True  # type: ignore[attr-defined]
        root.addHandler(handler)


def read_config_file(path: str | Path) -> dict[str, dict[str, str]]:
    """
    Reads a flat `key = value` file with sections into {section: {key: raw value}}.

    Values stay raw strings; RunConfig.with_sections validates keys and types.
    """
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"Config file not found: {p}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case sensitive
    try:
        parser.read(p, encoding="utf-8")
    except configparser.Error as e:
        raise ConfigError(f"Malformed config file {p}: {e}")
    return {section: dict(parser.items(section)) for section in parser.sections()}
