"""JSON schemas and CSV checks for every file the CLI reads or writes."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import jsonschema
import numpy as np

from .exceptions import InvalidInput
from .graph import n_edges

_number_list = {"type": "array", "items": {"type": "number"}}

GRAPH = {
    "type": "object",
    "required": ["p", "w"],
    "properties": {
        "p": {"type": "integer", "minimum": 1},
        "w": {"type": "array", "items": {"type": "number", "minimum": 0}},
    },
}

SIGNAL_MANIFEST = {
    "type": "object",
    "required": ["p1", "p2", "n", "seed"],
    "properties": {
        "p1": {"type": "integer", "minimum": 1},
        "p2": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 1},
        "seed": {"type": ["integer", "null"]},
    },
}

RESULT = {
    "type": "object",
    "required": ["w1", "w2", "objective_trace", "iterations", "converged", "config"],
    "properties": {
        "w1": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "w2": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "objective_trace": _number_list,
        "iterations": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
        "config": {"type": "object"},
    },
}

_recipe = {
    "type": "object",
    "required": ["family"],
    "properties": {
        "family": {"enum": ["erdos_renyi", "barabasi_albert", "watts_strogatz", "grid"]},
        "p": {"type": "integer", "minimum": 2},
        "rows": {"type": "integer", "minimum": 1},
        "cols": {"type": "integer", "minimum": 1},
        "params": {"type": "object"},
        "weight_low": {"type": "number", "exclusiveMinimum": 0},
        "weight_high": {"type": "number", "exclusiveMinimum": 0},
    },
}

EXPERIMENT = {
    "type": "object",
    "required": ["n_list", "seeds"],
    "properties": {
        "experiment_id": {"type": "string"},
        "graphs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["factor1", "factor2"],
                "properties": {"name": {"type": "string"}, "factor1": _recipe, "factor2": _recipe},
            },
        },
        "factor1": _recipe,
        "factor2": _recipe,
        "n_list": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "seeds": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
        "solver": {"type": "object"},
        "alpha_grid": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
        "alpha_select_n": {"type": "integer", "minimum": 1},
        "beta": {"type": "number", "minimum": 0},
        "mask": {
            "type": "object",
            "required": ["fraction"],
            "properties": {
                "fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "pattern": {"enum": ["random", "block"]},
            },
        },
        "output_dir": {"type": "string"},
    },
    "anyOf": [{"required": ["graphs"]}, {"required": ["factor1", "factor2"]}],
}

RATE_FIT = {
    "type": "object",
    "required": ["experiment_id", "graphs"],
    "properties": {
        "graphs": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["c", "r_squared", "slope_log_n"],
                "properties": {
                    "c": {"type": ["number", "null"]},
                    "r_squared": {"type": ["number", "null"]},
                    "slope_log_n": {"type": ["number", "null"]},
                },
            },
        }
    },
}

GRID_REPORT = {
    "type": "object",
    "required": ["runs"],
    "properties": {
        "runs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["alpha", "path", "converged", "iterations"],
                "properties": {"alpha": {"type": "number", "minimum": 0}},
            },
        },
        "best": {"type": "object"},
    },
}

METRICS_COLUMNS = [
    "experiment_id", "graph", "n", "p1", "p2", "seed", "rel_err_product",
    "rel_err_f1", "rel_err_f2", "pr_auc", "iterations", "wall_ms",
]

JSON_SCHEMAS = {
    "graph": GRAPH,
    "signal-manifest": SIGNAL_MANIFEST,
    "result": RESULT,
    "experiment": EXPERIMENT,
    "rate-fit": RATE_FIT,
    "grid-report": GRID_REPORT,
}


def validate_json(data, kind: str) -> None:
    try:
        jsonschema.validate(data, JSON_SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise InvalidInput(f"{kind}: {exc.message}") from exc
    if kind == "graph" and len(data["w"]) != n_edges(data["p"]):
        raise InvalidInput(f"graph: w has {len(data['w'])} entries, expected {n_edges(data['p'])}")


def _header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh), [])


def detect_kind(path) -> str:
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        if not isinstance(data, dict):
            raise InvalidInput(f"{path}: top-level JSON must be an object")
        if "objective_trace" in data:
            return "result"
        if "n_list" in data:
            return "experiment"
        if "w" in data:
            return "graph"
        if "runs" in data:
            return "grid-report"
        if "graphs" in data and "experiment_id" in data:
            return "rate-fit"
        if {"p1", "p2", "n"} <= set(data):
            return "signal-manifest"
        raise InvalidInput(f"{path}: cannot tell which schema applies")
    header = _header(path)
    if header == ["i1", "i2"]:
        return "mask"
    if header == ["i", "j", "weight"]:
        return "edges"
    if header[:1] == ["experiment_id"]:
        return "metrics"
    return "signals"


def check_file(path, kind: str | None = None) -> str:
    """Validate ``path`` against its schema; returns the kind that was checked."""
    path = Path(path)
    kind = kind or detect_kind(path)
    if kind in JSON_SCHEMAS:
        validate_json(json.loads(path.read_text()), kind)
    elif kind == "mask":
        _check_int_csv(path, ["i1", "i2"])
    elif kind == "edges":
        rows = _check_int_csv(path, ["i", "j", "weight"], last_float=True)
        if any(r[0] <= r[1] or r[1] < 1 or r[2] <= 0 for r in rows):
            raise InvalidInput(f"{path}: edges need i > j >= 1 and positive weight")
    elif kind == "metrics":
        _check_metrics(path)
    elif kind == "signals":
        manifest = json.loads(path.with_suffix(".json").read_text())
        validate_json(manifest, "signal-manifest")
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        expected = (manifest["n"], manifest["p1"] * manifest["p2"])
        if data.shape != expected:
            raise InvalidInput(f"{path}: shape {data.shape}, manifest says {expected}")
    else:
        raise InvalidInput(f"unknown file kind {kind!r}")
    return kind


def _check_int_csv(path, header, last_float=False):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != header:
            raise InvalidInput(f"{path}: expected header {','.join(header)}")
        rows = []
        for line in reader:
            try:
                vals = [int(v) for v in line[: len(header) - 1]]
                last = float(line[-1]) if last_float else int(line[-1])
            except (ValueError, IndexError) as exc:
                raise InvalidInput(f"{path}: bad row {line}") from exc
            if len(line) != len(header):
                raise InvalidInput(f"{path}: bad row {line}")
            rows.append(vals + [last])
    return rows


def _check_metrics(path):
    ints = {"n", "p1", "p2", "seed", "iterations"}
    floats = {"rel_err_product", "rel_err_f1", "rel_err_f2", "pr_auc", "wall_ms"}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != METRICS_COLUMNS:
            raise InvalidInput(f"{path}: expected columns {','.join(METRICS_COLUMNS)}")
        for row in reader:
            try:
                for key in ints:
                    int(row[key])
                for key in floats:
                    float(row[key])
            except (TypeError, ValueError) as exc:
                raise InvalidInput(f"{path}: bad row {row}") from exc
