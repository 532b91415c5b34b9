"""Experiment configuration: YAML (or JSON) files validated against a schema."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import jsonschema
import yaml

from .errors import ConfigError
from .suites import SUITES

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "pettykit experiment",
    "type": "object",
    "required": ["suite"],
    "additionalProperties": False,
    "properties": {
        "suite": {"enum": sorted(SUITES)},
        "seed": {"type": "integer", "minimum": 0},
        "params": {"type": "object"},
        "tolerances": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer", "minimum": 0},
                "outer": {"type": "integer", "minimum": 2},
                "inner": {"type": "integer", "minimum": 4},
                "n_samples": {"type": "integer", "minimum": 4},
            },
        },
        "body": {"type": ["string", "object"]},
        "measure": {"type": "object", "required": ["kind"]},
        "output": {"type": "string"},
        "csv_dir": {"type": "string"},
    },
}


@dataclass
class ExperimentConfig:
    suite: str
    seed: int
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    csv_dir: str | None = None
    base_dir: str | None = None


def parse_config(data, base_dir=None):
    """Validate a config mapping.

    The ``mc`` block and the single ``body``/``measure`` blocks are
    folded into the suite parameters (a single body replaces the suite's body
    list).
    """
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    mc = dict(data.get("mc", {}))
    seed = data.get("seed", mc.pop("seed", None))
    mc.pop("seed", None)
    if seed is None:
        raise ConfigError("config needs a seed (top level or under mc)")
    suite = SUITES[data["suite"]]
    params = dict(data.get("params", {}))
    for block, plural in (("body", "bodies"), ("measure", "measures")):
        if block not in data:
            continue
        if block in suite.defaults:
            params[block] = data[block]
        elif plural in suite.defaults:
            params[plural] = [data[block]]
        else:
            raise ConfigError(f"suite {suite.name} takes no {block} block")
    for key, val in mc.items():
        if key not in suite.mc_keys:
            raise ConfigError(f"suite {suite.name} has no Monte-Carlo budget {key!r}")
        params[key] = val
    return ExperimentConfig(data["suite"], seed, params, dict(data.get("tolerances", {})),
                            data.get("output"), data.get("csv_dir"), base_dir)


def load_config(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return parse_config(data, os.path.dirname(os.path.abspath(path)))
