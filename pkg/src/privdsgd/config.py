"""Strict JSON run configuration.

Every section and key is known in advance; an unknown key is an error that
names the closest valid key. Missing optional keys take the defaults below.
"""

from __future__ import annotations

import copy
import difflib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import MissingRequired, ParseError, UnknownKey

REQUIRED = object()

DEFAULTS: dict[str, dict[str, Any]] = {
    "network": {
        "n": REQUIRED,
        "topology": "ring",
        "weight_rule": "metropolis",
        "edges": None,
    },
    "problem": {
        "kind": REQUIRED,
        "dim": 1,
        "samples_per_node": 200,
        "sample_bound": 1.0,
        "data_seed": 0,
    },
    "schedule": {
        "a1": 0.35,
        "a2": 0.3,
        "a3": 0.24,
        "alpha_exp": 1.0,
        "beta_exp": 0.75,
        "gamma_exp": 0.7,
        "full_batch": False,
    },
    "privacy": {
        "sigma_exp": 0.0,
        "noise_offset": 1,
        "delta_exp": 3.0,
        "C": None,  # None: use the problem's exact adjacency bound
        "delta_sum_start": 0,
        "enabled": True,
    },
    "quantizer": {
        "delta": 1.0,  # None: lossless communication
    },
    "run": {
        "K": REQUIRED,
        "seed": 0,
        "init": 0.0,
        "ensemble": 1,
    },
    "sweep": {
        "grid": {},
    },
    "analysis": {
        "eta": None,
        "delta_star": 0.2,
        "window_fraction": 0.5,
    },
}

TOPOLOGY_CHOICES = ("ring", "complete", "star", "edges")
KIND_CHOICES = ("quadratic", "sine-quadratic")
WEIGHT_CHOICES = ("metropolis", "uniform-neighbor")

PRESET_DIR = Path(__file__).with_name("presets")


@dataclass
class RunConfig:
    """Resolved configuration; each section is a plain dict of its keys."""

    network: dict
    problem: dict
    schedule: dict
    privacy: dict
    quantizer: dict
    run: dict
    sweep: dict
    analysis: dict

    def to_dict(self) -> dict:
        return {name: copy.deepcopy(getattr(self, name)) for name in DEFAULTS}

    def get(self, dotted: str):
        section, key = dotted.split(".", 1)
        return getattr(self, section)[key]

    def with_overrides(self, overrides: dict[str, Any]) -> "RunConfig":
        """Copy with dotted-key overrides such as ``{"quantizer.delta": 5}``."""
        data = self.to_dict()
        for dotted, value in overrides.items():
            section, key = _split_key(dotted)
            data[section][key] = value
        return resolve(data)


def _nearest(name: str, options) -> str | None:
    match = difflib.get_close_matches(name, list(options), n=1, cutoff=0.5)
    return match[0] if match else None


def _split_key(dotted: str) -> tuple[str, str]:
    if "." not in dotted:
        raise UnknownKey(dotted, _nearest(dotted, DEFAULTS))
    section, key = dotted.split(".", 1)
    if section not in DEFAULTS:
        raise UnknownKey(section, _nearest(section, DEFAULTS))
    if key not in DEFAULTS[section]:
        raise UnknownKey(dotted, section + "." + (_nearest(key, DEFAULTS[section]) or "?"))
    return section, key


def _check_choice(section: str, key: str, value, choices) -> None:
    if value not in choices:
        raise ParseError(f"{section}.{key} must be one of {choices}, got {value!r}")


def resolve(data: dict) -> RunConfig:
    """Apply defaults and strict key checks to an already-decoded document."""
    if not isinstance(data, dict):
        raise ParseError("config root must be a JSON object")
    for section in data:
        if section not in DEFAULTS:
            raise UnknownKey(section, _nearest(section, DEFAULTS))
    out = {}
    for section, defaults in DEFAULTS.items():
        given = data.get(section, {}) or {}
        if not isinstance(given, dict):
            raise ParseError(f"section {section!r} must be an object")
        for key in given:
            if key not in defaults:
                raise UnknownKey(f"{section}.{key}", f"{section}.{_nearest(key, defaults)}" if _nearest(key, defaults) else None)
        merged = {}
        for key, default in defaults.items():
            if key in given:
                merged[key] = copy.deepcopy(given[key])
            elif default is REQUIRED:
                raise MissingRequired(f"missing required key {section}.{key}")
            else:
                merged[key] = copy.deepcopy(default)
        out[section] = merged

    _check_choice("network", "topology", out["network"]["topology"], TOPOLOGY_CHOICES)
    _check_choice("network", "weight_rule", out["network"]["weight_rule"], WEIGHT_CHOICES)
    _check_choice("problem", "kind", out["problem"]["kind"], KIND_CHOICES)
    if out["network"]["topology"] == "edges" and not out["network"]["edges"]:
        raise MissingRequired("network.edges is required when topology is 'edges'")
    if int(out["run"]["K"]) < 2:
        raise ParseError("run.K must be >= 2")
    if out["privacy"]["delta_sum_start"] not in (0, 1):
        raise ParseError("privacy.delta_sum_start must be 0 or 1")
    for dotted in out["sweep"]["grid"]:
        _split_key(dotted)
    return RunConfig(**out)


def parse_config(source) -> RunConfig:
    """Parse a config from a path, a preset name, or inline JSON text."""
    text = None
    if isinstance(source, dict):
        return resolve(source)
    if isinstance(source, os.PathLike) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        path = Path(source)
        if not path.exists() and (PRESET_DIR / f"{source}.json").exists():
            path = PRESET_DIR / f"{source}.json"
        if not path.exists():
            raise ParseError(f"config file not found: {source}")
        text = path.read_text(encoding="utf-8")
    else:
        text = source
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return resolve(data)


def load_preset(name: str) -> RunConfig:
    return parse_config(PRESET_DIR / f"{name}.json")
