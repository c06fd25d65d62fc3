"""Flat ``section.key = value`` run configuration.

All quantities are SI (Hz, s, m, W); decibels only in keys ending ``_db``.
Lists are comma separated, and ``start:stop:step`` expands to an inclusive
range.  ``#`` starts a comment.  Unknown keys are rejected.

Example::

    link.power_w = 1e-3
    link.distance_m = 10e3
    sweep.delta_f_hz = 25e9
    sweep.t_sw_s = 1e-4
    experiment.snr_db = 0:30:1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .physics import DEFAULT_GROUP_VELOCITY, LinkBudget, SweepConfig


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"range must be start:stop:step with step > 0, got {text!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(max(n, 0)))
    return tuple(float(p) for p in text.split(","))


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_KEYS = {
    "link.power_w": float,
    "link.distance_m": float,
    "link.alpha_db_per_m": float,
    "link.responsivity_a_per_w": float,
    "link.nep_w_per_sqrt_hz": float,
    "link.r_rb": float,
    "link.group_velocity_m_per_s": float,
    "sweep.delta_f_hz": float,
    "sweep.t_sw_s": float,
    "sweep.n_sw": int,
    "pigtail.length_m": float,
    "pigtail.n_scatterers": int,
    "pigtail.seed": int,
    "experiment.measure_times_s": _float_list,
    "experiment.powers_w": _float_list,
    "experiment.distances_m": _float_list,
    "experiment.snr_db": _float_list,
    "experiment.delta_fs_hz": _float_list,
    "experiment.trials": int,
    "experiment.master_seed": int,
    "experiment.workers": int,
    "experiment.monte_carlo": _bool,
    "identify.registry_path": str,
    "identify.snr_db": float,
    "identify.r_weight": float,
    "plan.target_log10_wwi": float,
}


@dataclass(frozen=True)
class RunConfig:
    link: LinkBudget
    sweep: SweepConfig
    pigtail_length_m: float = 0.5
    pigtail_n_scatterers: int = 1000
    pigtail_seed: int = 1
    measure_times_s: tuple[float, ...] = ()
    powers_w: tuple[float, ...] = ()
    distances_m: tuple[float, ...] = ()
    snr_db: tuple[float, ...] = ()
    delta_fs_hz: tuple[float, ...] = ()
    trials: int = 1000
    master_seed: int = 0
    workers: int = 1
    monte_carlo: bool = True
    registry_path: str = "registry.json"
    identify_snr_db: float | None = None
    r_weight: float = 0.5
    target_log10_wwi: float = -10.0
    raw: dict = field(default_factory=dict, compare=False)


def parse_config(text: str) -> RunConfig:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _KEYS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return build_config(values)


def build_config(values: dict) -> RunConfig:
    g = values.get
    try:
        link = LinkBudget(
            power_w=g("link.power_w", 1e-3),
            distance_m=g("link.distance_m", 0.0),
            alpha_db_per_m=g("link.alpha_db_per_m", 0.2e-3),
            responsivity_a_per_w=g("link.responsivity_a_per_w", 1.0),
            nep_w_per_sqrt_hz=g("link.nep_w_per_sqrt_hz", 1e-12),
            r_rb=g("link.r_rb", 8e-7),
            group_velocity_m_per_s=g("link.group_velocity_m_per_s", DEFAULT_GROUP_VELOCITY),
        )
        sweep = SweepConfig(g("sweep.delta_f_hz", 25e9), g("sweep.t_sw_s", 1e-4), g("sweep.n_sw", 1))
        cfg = RunConfig(
            link=link,
            sweep=sweep,
            pigtail_length_m=g("pigtail.length_m", 0.5),
            pigtail_n_scatterers=g("pigtail.n_scatterers", 1000),
            pigtail_seed=g("pigtail.seed", 1),
            measure_times_s=g("experiment.measure_times_s", ()),
            powers_w=g("experiment.powers_w", ()),
            distances_m=g("experiment.distances_m", ()),
            snr_db=g("experiment.snr_db", ()),
            delta_fs_hz=g("experiment.delta_fs_hz", ()),
            trials=g("experiment.trials", 1000),
            master_seed=g("experiment.master_seed", 0),
            workers=g("experiment.workers", 1),
            monte_carlo=g("experiment.monte_carlo", True),
            registry_path=g("identify.registry_path", "registry.json"),
            identify_snr_db=g("identify.snr_db"),
            r_weight=g("identify.r_weight", 0.5),
            target_log10_wwi=g("plan.target_log10_wwi", -10.0),
            raw=dict(values),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if not cfg.pigtail_length_m > 0:
        raise ConfigError("pigtail.length_m must be positive")
    if cfg.pigtail_n_scatterers < 1:
        raise ConfigError("pigtail.n_scatterers must be >= 1")
    if cfg.trials < 1 or cfg.workers < 1:
        raise ConfigError("experiment.trials and experiment.workers must be >= 1")
    if not 0.0 <= cfg.r_weight <= 1.0:
        raise ConfigError("identify.r_weight must lie in [0, 1]")
    for name in ("measure_times_s", "powers_w", "delta_fs_hz"):
        if any(x <= 0 for x in getattr(cfg, name)):
            raise ConfigError(f"experiment.{name} entries must be positive")
    if any(x < 0 for x in cfg.distances_m):
        raise ConfigError("experiment.distances_m entries must be >= 0")


def load_config(path) -> RunConfig:
    if path is None:
        return build_config({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
