"""Flat key-value experiment configuration.

Files hold one `key = value` pair per line with dotted section keys; `#`
starts a comment. Example:

    system.type = hubbard
    system.sites = 4
    system.t = 1.0
    system.v = 8.0
    system.mu = 8.0
    ansatz.blocks = 7
    strategy.list = na_trust_region, na_newton
    vqe.seed = 7
    vqe.count_gradients = true
    output.dir = runs/hubbard
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .driver import STRATEGIES, StrategyConfig
from .errors import ConfigError


def parse_kv_file(text: str) -> dict[str, str]:
    """Parse `key = value` lines; raises ConfigError with the line number."""
    values: dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {ln}: empty key or value in {raw!r}")
        if key in values:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        values[key] = value
    return values


def _get(values, key, cast, default=None, required=False):
    if key not in values:
        if required:
            raise ConfigError(f"missing required key {key!r}")
        return default
    raw = values.pop(key)
    try:
        if cast is bool:
            lowered = raw.lower()
            if lowered in ("true", "yes", "1"):
                return True
            if lowered in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} as {cast.__name__}") from exc


@dataclass
class ExperimentConfig:
    system_type: str
    strategies: list[str]
    seed: int = 0
    output_dir: Path = Path("runs")
    count_gradients: bool = True
    # hubbard systems
    sites: int = 4
    hopping: float = 1.0
    on_site: float = 8.0
    chem_penalty: float = 8.0
    penalty_target: float = 2.0
    # fcidump systems
    fcidump_path: Path | None = None
    # oracle sector; None derives it (half filling / NELEC+MS2)
    n_up: int | None = None
    n_dn: int | None = None
    ansatz_blocks: int | None = None
    outer_tol: float = 1e-6
    max_outer: int = 50
    sd_step: float = 0.1
    sd_inner_max: int = 20
    radius0: float = 0.1
    max_radius: float = 1.0

    def strategy_config(self, kind: str) -> StrategyConfig:
        return StrategyConfig(
            kind=kind,
            outer_tol=self.outer_tol,
            max_outer=self.max_outer,
            sd_step=self.sd_step,
            sd_inner_max=self.sd_inner_max,
            radius0=self.radius0,
            max_radius=self.max_radius,
        )


def load_config(path: Path) -> ExperimentConfig:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values = parse_kv_file(text)

    system_type = _get(values, "system.type", str, required=True).lower()
    if system_type not in ("hubbard", "fcidump"):
        raise ConfigError(f"system.type must be 'hubbard' or 'fcidump', got {system_type!r}")

    raw_strategies = _get(values, "strategy.list", str, required=True)
    strategies = [s.strip() for s in raw_strategies.split(",") if s.strip()]
    if not strategies:
        raise ConfigError("strategy.list is empty")
    for s in strategies:
        if s not in STRATEGIES:
            raise ConfigError(f"unknown strategy {s!r}; choose from {', '.join(STRATEGIES)}")
    if len(set(strategies)) != len(strategies):
        raise ConfigError("strategy.list has duplicates")

    cfg = ExperimentConfig(
        system_type=system_type,
        strategies=strategies,
        seed=_get(values, "vqe.seed", int, default=0),
        count_gradients=_get(values, "vqe.count_gradients", bool, default=True),
        output_dir=Path(_get(values, "output.dir", str, default="runs")),
        sites=_get(values, "system.sites", int, default=4),
        hopping=_get(values, "system.t", float, default=1.0),
        on_site=_get(values, "system.v", float, default=8.0),
        chem_penalty=_get(values, "system.mu", float, default=8.0),
        penalty_target=_get(values, "system.penalty_target", float, default=2.0),
        n_up=_get(values, "system.n_up", int),
        n_dn=_get(values, "system.n_dn", int),
        ansatz_blocks=_get(values, "ansatz.blocks", int),
        outer_tol=_get(values, "wahtor.outer_tol", float, default=1e-6),
        max_outer=_get(values, "wahtor.max_outer", int, default=50),
        sd_step=_get(values, "wahtor.sd_step", float, default=0.1),
        sd_inner_max=_get(values, "wahtor.sd_inner_max", int, default=20),
        radius0=_get(values, "wahtor.radius0", float, default=0.1),
        max_radius=_get(values, "wahtor.max_radius", float, default=1.0),
    )
    raw_fcidump = _get(values, "system.fcidump", str)
    if system_type == "fcidump":
        if raw_fcidump is None:
            raise ConfigError("system.type = fcidump requires system.fcidump = <path>")
        cfg.fcidump_path = Path(raw_fcidump)
        if not cfg.fcidump_path.is_file():
            raise ConfigError(f"fcidump file not found: {cfg.fcidump_path}")
    if values:
        unknown = ", ".join(sorted(values))
        raise ConfigError(f"unknown config keys: {unknown}")
    return cfg
