"""TOML experiment files.

Sections and keys::

    [design]      kind = "rademacher" | "uniform" | "fixed_block"
                  p, alpha          (rademacher, uniform)
                  block             (fixed_block; list of rows)
    [noise]       kind plus that kind's parameters:
                  gaussian: sigma       uniform_bounded: c    rademacher_scaled: c
                  gaussian_mixture: weights, sigmas
                  fir_mds: taps, eta, r1, r2               ar1: phi, sigma
    [model]       theta0
    [experiment]  epsilon, r_grid, trials, master_seed, workers, n_cap, n
    [bound]       p, alpha, delta, sigma_min, sigma_max, r, eps, n
    [check]       n, max_lag, s_grid, delta, seed

Unknown sections or keys are rejected.
"""

from __future__ import annotations

from pathlib import Path

import tomli
import tomli_w

from .design import DesignSpec
from .montecarlo import ExperimentConfig
from .noise import NoiseSpec

__all__ = [
    "ConfigError",
    "load_config",
    "loads_config",
    "parse_override",
    "apply_overrides",
    "experiment_from_dict",
    "experiment_to_dict",
    "dumps_experiment",
]

_DESIGN_KEYS = {"kind", "p", "alpha", "block"}
_NOISE_KEYS = {"kind", "sigma", "c", "weights", "sigmas", "taps", "eta", "r1", "r2", "phi"}
SCHEMA = {
    "design": _DESIGN_KEYS,
    "noise": _NOISE_KEYS,
    "model": {"theta0"},
    "experiment": {"epsilon", "r_grid", "trials", "master_seed", "workers", "n_cap", "n"},
    "bound": {"p", "alpha", "delta", "sigma_min", "sigma_max", "r", "eps", "n"},
    "check": {"n", "max_lag", "s_grid", "delta", "seed"},
}


class ConfigError(ValueError):
    """Invalid, missing or unknown configuration entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def _validate(raw: dict) -> dict:
    for section, table in raw.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]", section)
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table", section)
        for key in table:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown config key {section}.{key}", f"{section}.{key}")
    return raw


def loads_config(text: str) -> dict:
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return _validate(raw)


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text)


def parse_override(item: str, default_section: str | None = None) -> tuple[str, str, object]:
    """Split ``section.key=value``; the value is read as a TOML literal, else a bare string."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not KEY=VALUE")
    key, text = item.split("=", 1)
    key = key.strip()
    if "." in key:
        section, name = key.split(".", 1)
    elif default_section is not None:
        section, name = default_section, key
    else:
        raise ConfigError(f"override key {key!r} needs a section prefix, e.g. experiment.{key}", key)
    try:
        value = tomli.loads(f"v = {text.strip()}")["v"]
    except tomli.TOMLDecodeError:
        value = text.strip()
    return section, name, value


def apply_overrides(raw: dict, overrides, default_section: str | None = None) -> dict:
    """Return a copy of ``raw`` with ``KEY=VALUE`` overrides applied on top."""
    merged = {section: dict(table) for section, table in raw.items()}
    for item in overrides or ():
        section, name, value = parse_override(item, default_section)
        merged.setdefault(section, {})[name] = value
    return _validate(merged)


def require_section(raw: dict, section: str) -> dict:
    if section not in raw:
        raise ConfigError(f"missing config section [{section}]", section)
    return raw[section]


def design_from_dict(table: dict) -> DesignSpec:
    try:
        return DesignSpec.from_dict(table)
    except KeyError as exc:
        key = f"design.{exc.args[0]}"
        raise ConfigError(f"missing parameter {key}", key) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [design]: {exc}", "design") from exc


def noise_from_dict(table: dict) -> NoiseSpec:
    try:
        return NoiseSpec.from_dict(table)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [noise]: {exc}", "noise") from exc


def experiment_from_dict(raw: dict) -> ExperimentConfig:
    design = design_from_dict(require_section(raw, "design"))
    noise = noise_from_dict(require_section(raw, "noise"))
    exp = dict(raw.get("experiment", {}))
    exp.pop("n", None)
    kwargs = {k: exp[k] for k in ("epsilon", "r_grid", "trials", "master_seed", "workers", "n_cap") if k in exp}
    if "theta0" in raw.get("model", {}):
        kwargs["theta0"] = raw["model"]["theta0"]
    try:
        return ExperimentConfig(design=design, noise=noise, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid experiment: {exc}", "experiment") from exc


def experiment_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "design": cfg.design.to_dict(),
        "noise": cfg.noise.to_dict(),
        "model": {"theta0": list(cfg.theta0)},
        "experiment": {
            "epsilon": cfg.epsilon,
            "r_grid": list(cfg.r_grid),
            "trials": cfg.trials,
            "master_seed": cfg.master_seed,
            "workers": cfg.workers,
            "n_cap": cfg.n_cap,
        },
    }


def dumps_experiment(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(experiment_to_dict(cfg))
