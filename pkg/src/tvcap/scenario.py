"""Scenario files: schema, loading, validation and overrides.

A scenario is a JSON document describing one reproducible run: which model
to drive (circuit, stability suite, sheet, fdtd, sweep), every physical
parameter in SI units (field names carry the unit), and the list of checks
with their tolerances. Bundled scenarios live in the package's scenarios/
directory.
"""

from __future__ import annotations

import copy
import json
from importlib import resources

import jsonschema

from .errors import ScenarioError

SCENARIO_KINDS = ("circuit", "stability", "sheet", "fdtd", "sweep")

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["name", "kind", "params", "checks"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "pattern": r"^[A-Za-z0-9_\-]+$"},
        "kind": {"enum": list(SCENARIO_KINDS)},
        "description": {"type": "string"},
        "params": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "type"],
                "properties": {
                    "name": {"type": "string"},
                    "type": {"type": "string"},
                },
            },
        },
    },
}


def load_scenario(path) -> dict:
    """Parse a scenario file; raises ScenarioError on unreadable/bad JSON."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            scenario = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario


def validate_schema(scenario: dict) -> None:
    try:
        jsonschema.validate(scenario, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ScenarioError(f"scenario fails the schema: {exc.message}") from exc


def apply_overrides(scenario: dict, overrides: list[str]) -> dict:
    """Return a deep copy with key=value overrides applied.

    The key is a dotted path from the scenario root; a bare key that does
    not exist at the root is looked up under params (so `modulation=off`
    targets params.modulation). Values parse as JSON, falling back to a
    plain string.
    """
    out = copy.deepcopy(scenario)
    for item in overrides:
        if "=" not in item:
            raise ScenarioError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        parts = key.split(".")
        if parts[0] not in out and "params" in out:
            parts = ["params"] + parts
        node = out
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ScenarioError(f"override path {key!r} not found in scenario")
            node = node[part]
        if not isinstance(node, dict) or parts[-1] not in node:
            raise ScenarioError(f"override path {key!r} not found in scenario")
        node[parts[-1]] = value
    return out


def bundled_scenario_names() -> list[str]:
    files = resources.files("tvcap").joinpath("scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def bundled_scenario_path(name: str):
    files = resources.files("tvcap").joinpath("scenarios")
    path = files.joinpath(f"{name}.json")
    if not path.is_file():
        raise ScenarioError(
            f"no bundled scenario {name!r}; available: {bundled_scenario_names()}")
    return path


def load_bundled(name: str) -> dict:
    with resources.as_file(bundled_scenario_path(name)) as real:
        return load_scenario(real)
