"""Experiment configuration files.

Plain ``key = value`` lines grouped under ``[section]`` headers (INI).  Every
key must be known for the chosen experiment; anything else is an error so
a typo never silently falls back to a default.

Value syntax
    integers / reals      ``n = 101``, ``epsilon = 0.5``
    integer ranges        ``k = 1:50`` (inclusive), ``k = 10:100:10``, ``k = 1,5,10``
    real lists            ``alpha = 0, 0.5, 1``, ``nu = geom:0.6:20:20``, ``nu = lin:0:1:11``
    booleans              ``yes/no``, ``true/false``, ``1/0``
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "EXPERIMENTS",
    "parse_config",
    "parse_config_text",
    "int_range",
    "real_list",
]


class ConfigError(ValueError):
    pass


def int_range(text: str) -> list[int]:
    """Expand ``a:b``, ``a:b:step`` (inclusive) and comma lists thereof."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split(":")
        try:
            nums = [int(b) for b in bits]
        except ValueError:
            raise ConfigError(f"not an integer range: {text!r}") from None
        if len(nums) == 1:
            out.append(nums[0])
        elif len(nums) in (2, 3):
            step = nums[2] if len(nums) == 3 else 1
            if step <= 0:
                raise ConfigError(f"range step must be positive: {text!r}")
            out.extend(range(nums[0], nums[1] + 1, step))
        else:
            raise ConfigError(f"not an integer range: {text!r}")
    return out


def real_list(text: str) -> list[float]:
    text = str(text).strip()
    for kind, fn in (("geom:", np.geomspace), ("lin:", np.linspace)):
        if text.startswith(kind):
            bits = text[len(kind):].split(":")
            if len(bits) != 3:
                raise ConfigError(f"expected {kind}start:stop:count, got {text!r}")
            try:
                a, b, c = float(bits[0]), float(bits[1]), int(bits[2])
            except ValueError:
                raise ConfigError(f"bad {kind} spec {text!r}") from None
            if c < 1 or (kind == "geom:" and (a <= 0 or b <= 0)):
                raise ConfigError(f"bad {kind} spec {text!r}")
            return [float(x) for x in fn(a, b, c)]
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"not a list of numbers: {text!r}") from None


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None


def _real(text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"not a finite number: {text!r}")
    return v


def _real_or_auto(text):
    return None if str(text).strip().lower() == "auto" else _real(text)


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _lag(text):
    t = str(text).strip().lower()
    if t not in ("none", "distance"):
        raise ConfigError(f"lag must be 'none' or 'distance', got {text!r}")
    return t


_PARSERS = {
    "int": _int,
    "real": _real,
    "dt": _real_or_auto,
    "ints": int_range,
    "reals": real_list,
    "bool": _bool,
    "lag": _lag,
    "str": str,
}

# key -> (section, type); shared by every experiment that accepts the key
_KEYS = {
    "n": ("network", "int"),
    "k": ("network", "int"),
    "alpha": ("network", "real"),
    "epsilon": ("network", "real"),
    "lag": ("network", "lag"),
    "omega": ("network", "real"),
    "normalize": ("network", "bool"),
    "dt": ("dynamics", "dt"),
    "t_max": ("dynamics", "real"),
    "amplitude": ("dynamics", "real"),
    "trials": ("dynamics", "int"),
    "sample_period": ("dynamics", "real"),
    "simulate": ("dynamics", "bool"),
    "q": ("sweep", "ints"),
    "ks": ("sweep", "ints"),
    "ns": ("sweep", "ints"),
    "alphas": ("sweep", "reals"),
    "nus": ("sweep", "reals"),
    "sim_ns": ("sweep", "ints"),
    "sim_k": ("sweep", "int"),
    "n_max": ("sweep", "int"),
    "cells": ("sweep", "int"),
    "rel_tol": ("sweep", "real"),
    "horizon": ("sweep", "real"),
}

# experiment -> (desk defaults, full-scale overrides)
EXPERIMENTS: dict[str, tuple[dict, dict]] = {
    "fig1": (
        dict(n=21, k=2, epsilon=1.0, q=[3], dt=None, t_max=5000.0, amplitude=1e-3, sample_period=1.0),
        {},
    ),
    "kring_sweep": (
        dict(n=101, ks=[1, 5, 10, 20, 35, 50], q=list(range(51)), epsilon=1.0, dt=None, t_max=5000.0,
             amplitude=1e-3, sample_period=5.0, simulate=True),
        dict(ks=list(range(1, 51))),
    ),
    "critical_k": (
        dict(ns=list(range(10, 101)), sim_ns=list(range(10, 101, 10)), epsilon=1.0, dt=None, t_max=5000.0,
             amplitude=1e-3, sample_period=5.0, simulate=True),
        {},
    ),
    "alpha_sweep": (
        dict(n=101, alphas=[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0], q=list(range(51)), epsilon=1.0, dt=None,
             t_max=5000.0, amplitude=1e-3, sample_period=5.0, simulate=True),
        dict(alphas=[round(0.1 * i, 10) for i in range(41)]),
    ),
    "phaselag_sweep": (
        dict(n=101, ks=list(range(1, 51)), sim_k=10, q=list(range(101)), epsilon=1.0, dt=None, t_max=2000.0,
             amplitude=1e-3, sample_period=5.0, simulate=True),
        {},
    ),
    "delay_waves": (
        dict(n=101, k=50, epsilon=1.0, normalize=True, omega=1.0, nus=real_list("geom:0.6:20:20"), trials=50,
             dt=0.05, t_max=300.0, sample_period=10.0, simulate=True),
        dict(trials=1000),
    ),
    "verify_oracle": (
        dict(ns=[5, 8, 13, 21, 32], alphas=[0.0, 0.5, 1.0, 2.0, 4.0], n=101, k=10, lag="distance", epsilon=1.0,
             cells=20, rel_tol=0.02, horizon=2000.0),
        {},
    ),
}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    params: dict
    out_dir: str | None = None
    full_scale: bool = False
    source: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]

    def get(self, key, default=None):
        return self.params.get(key, default)

    def echo(self) -> dict:
        """JSON-ready record of every effective setting."""
        return {"experiment": self.experiment, "seed": self.seed, "full_scale": self.full_scale,
                "params": {k: self.params[k] for k in sorted(self.params)}}


def parse_config_text(text: str, full_scale: bool = False) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section")
    exp = dict(cp["experiment"])
    for key in exp:
        if key not in ("id", "seed"):
            raise ConfigError(f"unknown key {key!r} in [experiment]")
    if "id" not in exp:
        raise ConfigError("missing required key 'id' in [experiment]")
    if "seed" not in exp:
        raise ConfigError("missing required key 'seed' in [experiment]")
    name = exp["id"].strip()
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; expected one of {sorted(EXPERIMENTS)}")
    seed = _int(exp["seed"])
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    desk, full = EXPERIMENTS[name]
    params = dict(desk)
    if full_scale:
        params.update(full)
    out_dir = None
    source = {}
    for section in cp.sections():
        if section == "experiment":
            continue
        for key, raw in cp[section].items():
            if section == "output":
                if key != "dir":
                    raise ConfigError(f"unknown key {key!r} in [output]")
                out_dir = raw.strip()
                continue
            spec = _KEYS.get(key)
            if spec is None or key not in desk:
                raise ConfigError(f"unknown key {key!r} in [{section}] for experiment {name!r}")
            if spec[0] != section:
                raise ConfigError(f"key {key!r} belongs in [{spec[0]}], not [{section}]")
            params[key] = _PARSERS[spec[1]](raw)
            source[key] = raw
    _validate(name, params)
    return ExperimentConfig(name, seed, params, out_dir, full_scale, source)


def parse_config(path, full_scale: bool = False) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, full_scale)


def _validate(name: str, p: dict) -> None:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    if "n" in p:
        need(p["n"] >= 3, "n must be >= 3")
    if "k" in p:
        need(1 <= p["k"] <= p["n"] // 2, f"k must lie in [1, {p['n'] // 2}]")
    if "ks" in p:
        need(p["ks"] and all(1 <= k <= p["n"] // 2 for k in p["ks"]), f"ks must lie in [1, {p['n'] // 2}]")
    if "sim_k" in p:
        need(1 <= p["sim_k"] <= p["n"] // 2, "sim_k out of range")
    if "ns" in p:
        need(all(n >= 3 for n in p["ns"]), "ns entries must be >= 3")
    if "sim_ns" in p:
        need(all(n >= 3 for n in p["sim_ns"]), "sim_ns entries must be >= 3")
    if "q" in p:
        need(p["q"] and all(0 <= q < p["n"] for q in p["q"]), f"q entries must lie in [0, {p['n'] - 1}]")
    if "alphas" in p:
        need(all(a >= 0 for a in p["alphas"]), "alphas must be >= 0")
    if "nus" in p:
        need(p["nus"] and all(v > 0 for v in p["nus"]), "nus must be positive")
    need(p.get("epsilon", 1.0) > 0, "epsilon must be positive")
    if p.get("dt") is not None:
        need(p["dt"] > 0, "dt must be positive")
    for key in ("t_max", "amplitude", "sample_period", "horizon", "rel_tol"):
        if key in p:
            need(p[key] > 0, f"{key} must be positive")
    for key in ("trials", "cells"):
        if key in p:
            need(p[key] >= 1, f"{key} must be >= 1")
