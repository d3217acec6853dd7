"""Strict JSON configuration shared by all CLI commands.

One file carries the arm geometry, mass model, LQR cost diagonals, gain-table
grid, and simulation parameters.  Unknown keys are rejected everywhere so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import jsonschema

from .dynamics import MassModel
from .errors import ConfigError
from .gain_table import GridSpec
from .kinematics import ArmGeometry
from .riccati import CostWeights
from .simulator import SimConfig

_RANGE_SCHEMA = {
    "type": "object",
    "properties": {
        "min": {"type": "number"},
        "max": {"type": "number"},
        "count": {"type": "integer"},
    },
    "required": ["min", "max", "count"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "geometry": {
            "type": "object",
            "properties": {k: {"type": "number"} for k in ("L1", "L2", "L3")},
            "required": ["L1", "L2", "L3"],
            "additionalProperties": False,
        },
        "masses": {
            "type": "object",
            "properties": {
                k: {"type": "number"}
                for k in ("m2", "m3", "m4", "M1", "M2", "M3", "g")
            },
            "required": ["m2", "m3", "m4", "M1", "M2", "M3", "g"],
            "additionalProperties": False,
        },
        "cost": {
            "type": "object",
            "properties": {
                "q_diag": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 8,
                    "maxItems": 8,
                },
                "r_diag": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 4,
                    "maxItems": 4,
                },
            },
            "required": ["q_diag", "r_diag"],
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {
                "theta1": _RANGE_SCHEMA,
                "theta2": _RANGE_SCHEMA,
                "theta3": _RANGE_SCHEMA,
                "theta4": _RANGE_SCHEMA,
            },
            "required": ["theta1", "theta2", "theta3", "theta4"],
            "additionalProperties": False,
        },
        "sim": {
            "type": "object",
            "properties": {
                "dt": {"type": "number"},
                "control_period": {"type": "number"},
                "duration": {"type": "number"},
            },
            "required": ["dt", "control_period", "duration"],
            "additionalProperties": False,
        },
    },
    "required": ["geometry", "masses", "cost", "grid", "sim"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class ArmConfig:
    geometry: ArmGeometry
    masses: MassModel
    weights: CostWeights
    grid: GridSpec
    sim: SimConfig


def parse_config(raw: dict) -> ArmConfig:
    """Validate a parsed JSON document and build the domain objects (which
    re-check their own invariants)."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from exc

    try:
        geometry = ArmGeometry(**raw["geometry"])
        masses = MassModel(**raw["masses"])
        weights = CostWeights.from_diagonals(raw["cost"]["q_diag"], raw["cost"]["r_diag"])
        grid = GridSpec.from_ranges(
            (raw["grid"][k]["min"], raw["grid"][k]["max"], raw["grid"][k]["count"])
            for k in ("theta1", "theta2", "theta3", "theta4")
        )
        sim = SimConfig(**raw["sim"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ArmConfig(geometry, masses, weights, grid, sim)


def load_config(path) -> ArmConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)
