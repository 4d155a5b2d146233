"""Run configuration: flat ``key = value`` text with bracketed sections.

Three sections are recognised::

    [paths]   table rules corpus matrix_dir gold_inventory output_dir
    [params]  frame_rate speaker context span metric jobs
    [seeds]   split kmeans sample cap

Command-line flags override config values. Validation checks that every
input path a subcommand needs exists and that frame_rate is positive.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ToolkitError


class ConfigError(ToolkitError):
    pass


_PATH_KEYS = ("table", "rules", "corpus", "matrix_dir", "gold_inventory", "output_dir")


@dataclass
class RunConfig:
    table: Path | None = None
    rules: Path | None = None
    corpus: Path | None = None
    matrix_dir: Path | None = None
    gold_inventory: Path | None = None
    output_dir: Path = Path("out")
    frame_rate: float = 50.0
    speaker: str = "within"
    context: str = "within"
    span: str = "triphone"
    metric: str = "angular"
    jobs: int = 1
    seeds: dict[str, int] = field(default_factory=dict)

    def seed(self, name: str) -> int:
        return self.seeds.get(name, 0)


def load_config(path=None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"config file not found: {path}")
    for key in _PATH_KEYS:
        if parser.has_option("paths", key):
            setattr(cfg, key, Path(parser.get("paths", key)))
    if parser.has_section("params"):
        p = parser["params"]
        try:
            cfg.frame_rate = p.getfloat("frame_rate", cfg.frame_rate)
            cfg.jobs = p.getint("jobs", cfg.jobs)
        except ValueError as e:
            raise ConfigError(f"bad numeric value in [params]: {e}") from None
        for key in ("speaker", "context", "span", "metric"):
            setattr(cfg, key, p.get(key, getattr(cfg, key)))
    if parser.has_section("seeds"):
        try:
            cfg.seeds = {k: int(v) for k, v in parser["seeds"].items()}
        except ValueError as e:
            raise ConfigError(f"bad seed value: {e}") from None
    return cfg


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    """Copy flag values (when set) over the config."""
    for key in _PATH_KEYS + ("frame_rate", "speaker", "context", "span", "metric", "jobs"):
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(cfg, key, Path(flag) if key in _PATH_KEYS else flag)
    return cfg


def validate(cfg: RunConfig, needs: tuple[str, ...]) -> None:
    """Check required inputs exist; raises ConfigError naming the path."""
    if not cfg.frame_rate > 0:
        raise ConfigError(f"frame_rate must be positive, got {cfg.frame_rate}")
    for key in needs:
        value = getattr(cfg, key)
        if value is None:
            raise ConfigError(f"missing required path: {key}")
        if not Path(value).exists():
            raise ConfigError(f"{key} does not exist: {value}")
