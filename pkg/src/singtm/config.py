"""Experiment configuration: a single schema-validated JSON document."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .mesh import DomainSpec

__all__ = ["ExperimentConfig", "load_config", "config_from_dict", "CONFIG_SCHEMA"]

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["problem", "nonlinearity", "theorem"],
    "additionalProperties": False,
    "properties": {
        "problem": {
            "type": "object",
            "required": ["alpha", "gamma", "domain"],
            "additionalProperties": False,
            "properties": {
                "alpha": {"type": "number", "exclusiveMinimum": 0},
                "gamma": {"type": "number", "minimum": 0, "exclusiveMaximum": 2},
                "domain": {
                    "type": "object",
                    "required": ["kind"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["disk", "polygon"]},
                        "radius": {"type": "number", "exclusiveMinimum": 0},
                        "vertices": {
                            "type": "array", "minItems": 3,
                            "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                      "items": {"type": "number"}},
                        },
                    },
                },
            },
        },
        "nonlinearity": {
            "type": "object",
            "required": ["family"],
            "additionalProperties": False,
            "properties": {
                "family": {"enum": ["rational", "sign_perturbed", "shifted_quadratic", "user_table"]},
                "beta0": {"type": "number", "minimum": 0},
                "nu": {"type": "number", "minimum": 0},
                "a": {"type": ["number", "null"], "minimum": 0},
                "table": {"type": ["array", "null"],
                          "items": {"type": "array", "minItems": 2, "maxItems": 2,
                                    "items": {"type": "number"}}},
            },
        },
        "theorem": {"enum": ["1.1", "1.2", "1.3"]},
        "mesh": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "target_h": {"type": "number", "exclusiveMinimum": 0},
                "refine_levels": {"type": "integer", "minimum": 0},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "path_points": {"type": "integer", "minimum": 16},
                "max_iter": {"type": "integer", "minimum": 1},
                "rho": {"type": "number", "exclusiveMinimum": 0},
                "sphere_samples": {"type": "integer", "minimum": 1},
                "restarts": {"type": "integer", "minimum": 1},
            },
        },
        "checks": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sigma0": {"type": "number", "minimum": 0},
                "sigma1": {"type": "number", "exclusiveMinimum": 0},
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "k": {"type": "integer", "minimum": 2},
                "c_user": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "t_check": {"type": "number", "exclusiveMinimum": 0},
                "grid_points": {"type": "integer", "minimum": 1000},
            },
        },
        "ridge": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "j_values": {"type": "array", "minItems": 1,
                             "items": {"type": "integer", "minimum": 2}},
            },
        },
        "quadrature": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "order": {"type": "integer", "minimum": 1},
                "radial_nodes": {"type": "integer", "minimum": 2},
                "angular_nodes": {"type": "integer", "minimum": 2},
            },
        },
        "eig_count": {"type": "integer", "minimum": 1},
        "output_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
    },
}

_DEFAULTS = {
    "nonlinearity": {"beta0": 1.0, "nu": 0.0, "a": None, "table": None},
    "mesh": {"target_h": 0.125, "refine_levels": 2},
    "solver": {"tol": 1e-6, "path_points": 25, "max_iter": 200, "rho": 0.05,
               "sphere_samples": 200, "restarts": 6},
    "checks": {"sigma0": 0.0, "sigma1": 1.0, "delta": 0.1, "k": 2, "c_user": None,
               "t_check": 20.0, "grid_points": 100_000},
    "ridge": {"j_values": [2, 4, 8, 16, 32, 64]},
    "quadrature": {"order": 7, "radial_nodes": 12, "angular_nodes": 8},
    "eig_count": 2,
    "output_dir": "out",
    "seed": 0,
}


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict = field(repr=False)

    @property
    def alpha(self) -> float:
        return self.raw["problem"]["alpha"]

    @property
    def gamma(self) -> float:
        return self.raw["problem"]["gamma"]

    @property
    def theorem(self) -> str:
        return self.raw["theorem"]

    @property
    def seed(self) -> int:
        return self.raw["seed"]

    @property
    def output_dir(self) -> Path:
        return Path(self.raw["output_dir"])

    def domain(self) -> DomainSpec:
        d = self.raw["problem"]["domain"]
        if d["kind"] == "disk":
            if "radius" not in d:
                raise ValueError("disk domain needs a radius")
            return DomainSpec.disk(d["radius"])
        if "vertices" not in d:
            raise ValueError("polygon domain needs vertices")
        return DomainSpec.polygon(d["vertices"])

    def section(self, name: str) -> dict:
        return self.raw[name]

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True)


def _merge(defaults, given):
    if not isinstance(defaults, dict):
        return given
    out = dict(defaults)
    for k, v in (given or {}).items():
        out[k] = _merge(defaults.get(k), v) if isinstance(v, dict) else v
    return out


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Validate against the schema, fill defaults, and sanity-check values."""
    jsonschema.validate(raw, CONFIG_SCHEMA)
    filled = dict(raw)
    for key, default in _DEFAULTS.items():
        filled[key] = _merge(default, raw.get(key)) if isinstance(default, dict) else raw.get(key, default)
    cfg = ExperimentConfig(raw=filled)
    cfg.domain()  # validates polygon geometry / radius presence
    if not math.isfinite(cfg.alpha):
        raise ValueError("alpha must be finite")
    if cfg.theorem == "1.3" and filled["checks"]["sigma0"] <= 0:
        raise ValueError("theorem 1.3 requires sigma0 > 0")
    return cfg


def load_config(path) -> ExperimentConfig:
    return config_from_dict(json.loads(Path(path).read_text()))
