"""JSON documents: scenarios, forward data and recovery reports.

Floats are written with Python's shortest round-trip representation, so a
parse of a serialized document reproduces every double exactly.
"""

import json

import jsonschema
import numpy as np

from .errors import SchemaError
from .forward import MomentVector, Probe, SphericalMeanTrace
from .hankel import kernel_from_dict
from .model import HyperplaneSources, PointSources, RadialSources, SensorSet

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}

_MODEL_SCHEMA = {
    "type": "object",
    "required": ["kind", "amplitudes"],
    "properties": {
        "kind": {"enum": ["points", "hyperplanes", "radial"]},
        "amplitudes": _VEC,
        "nodes": _MAT,
        "normals": _MAT,
        "offsets": _VEC,
        "kernel": {"type": "object", "required": ["name"]},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "points"}}},
         "then": {"required": ["nodes"]}},
        {"if": {"properties": {"kind": {"const": "hyperplanes"}}},
         "then": {"required": ["normals", "offsets"]}},
        {"if": {"properties": {"kind": {"const": "radial"}}},
         "then": {"required": ["nodes", "kernel"]}},
    ],
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["dim", "model", "sensors"],
    "properties": {
        "dim": {"type": "integer", "minimum": 2},
        "model": _MODEL_SCHEMA,
        "sensors": _MAT,
    },
}

_MOMENT_SCHEMA = {
    "type": "object",
    "required": ["sensor", "probe", "values"],
    "properties": {
        "sensor": _VEC,
        "probe": {"enum": [p.value for p in Probe]},
        "normalized": {"type": "boolean"},
        "first_index": {"type": "integer", "minimum": 0},
        "values": _VEC,
    },
}

_TRACE_SCHEMA = {
    "type": "object",
    "required": ["sensor", "radii", "values"],
    "properties": {"sensor": _VEC, "radii": _VEC, "values": _VEC,
                   "covers_support": {"type": "boolean"}},
}

DATA_SCHEMA = {
    "type": "object",
    "required": ["type", "dim", "data"],
    "properties": {
        "type": {"enum": ["moments", "traces"]},
        "dim": {"type": "integer", "minimum": 2},
        "kind": {"enum": ["points", "hyperplanes", "radial"]},
        "m": {"type": "integer", "minimum": 1},
        "kernel": {"type": "object", "required": ["name"]},
        "data": {"type": "array", "minItems": 1},
    },
    "allOf": [
        {"if": {"properties": {"type": {"const": "moments"}}},
         "then": {"properties": {"data": {"items": _MOMENT_SCHEMA}}}},
        {"if": {"properties": {"type": {"const": "traces"}}},
         "then": {"properties": {"data": {"items": _TRACE_SCHEMA}}}},
    ],
}


def _validate(doc, schema, what):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"invalid {what} at {where}: {exc.message}") from None


def _plain(obj):
    """Recursively convert numpy containers and scalars to JSON-native types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(doc, indent=2):
    try:
        return json.dumps(_plain(doc), indent=indent, allow_nan=False) + "\n"
    except ValueError as exc:
        raise SchemaError(f"document contains non-finite numbers: {exc}") from None


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None


def write_json(path, doc):
    text = dumps(doc)
    if path in (None, "-"):
        print(text, end="")
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None


# ---------------------------------------------------------------------------
# models and scenarios
# ---------------------------------------------------------------------------

def model_to_dict(model):
    if isinstance(model, RadialSources):
        return {"kind": "radial", "nodes": model.nodes, "amplitudes": model.amplitudes,
                "kernel": model.kernel.to_dict()}
    if isinstance(model, PointSources):
        return {"kind": "points", "nodes": model.nodes, "amplitudes": model.amplitudes}
    if isinstance(model, HyperplaneSources):
        return {"kind": "hyperplanes", "normals": model.normals, "offsets": model.offsets,
                "amplitudes": model.amplitudes}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(spec, dim=None):
    _validate(spec, _MODEL_SCHEMA, "model")
    try:
        kind = spec["kind"]
        if kind == "points":
            return PointSources(spec["nodes"], spec["amplitudes"], dim)
        if kind == "hyperplanes":
            return HyperplaneSources(spec["normals"], spec["offsets"], spec["amplitudes"], dim)
        return RadialSources(spec["nodes"], spec["amplitudes"], kernel_from_dict(spec["kernel"]), dim)
    except (ValueError, KeyError, TypeError) as exc:
        raise SchemaError(f"invalid model: {exc}") from None


def scenario_to_dict(model, sensors):
    pts = sensors.points if isinstance(sensors, SensorSet) else np.asarray(sensors, dtype=float)
    return {"dim": model.dim, "model": model_to_dict(model), "sensors": pts}


def scenario_from_dict(doc):
    """Parse a scenario document into (model, SensorSet)."""
    _validate(doc, SCENARIO_SCHEMA, "scenario")
    dim = doc["dim"]
    model = model_from_dict(doc["model"], dim)
    try:
        sensors = SensorSet(doc["sensors"], dim)
    except ValueError as exc:
        raise SchemaError(f"invalid sensors: {exc}") from None
    return model, sensors


# ---------------------------------------------------------------------------
# forward data
# ---------------------------------------------------------------------------

def moment_to_dict(mv):
    return {"sensor": mv.sensor, "probe": mv.probe.value, "normalized": mv.normalized,
            "first_index": mv.first_index, "values": mv.values}


def moment_from_dict(d):
    _validate(d, _MOMENT_SCHEMA, "moment vector")
    try:
        return MomentVector(d["sensor"], d["probe"], d["values"], d.get("first_index"),
                            d.get("normalized", False))
    except ValueError as exc:
        raise SchemaError(f"invalid moment vector: {exc}") from None


def trace_to_dict(tr):
    return {"sensor": tr.sensor, "radii": tr.radii, "values": tr.values,
            "covers_support": tr.covers_support}


def trace_from_dict(d):
    _validate(d, _TRACE_SCHEMA, "trace")
    try:
        return SphericalMeanTrace(d["sensor"], d["radii"], d["values"], d.get("covers_support", True))
    except ValueError as exc:
        raise SchemaError(f"invalid trace: {exc}") from None


def data_to_dict(items, kind=None, m=None, kernel=None):
    """Wrap per-sensor moment vectors or traces into one document."""
    items = list(items)
    traces = isinstance(items[0], SphericalMeanTrace)
    doc = {"type": "traces" if traces else "moments", "dim": int(items[0].dim)}
    if kind is not None:
        doc["kind"] = kind
    if m is not None:
        doc["m"] = int(m)
    if kernel is not None:
        doc["kernel"] = kernel.to_dict()
    doc["data"] = [trace_to_dict(t) if traces else moment_to_dict(t) for t in items]
    return doc


def data_from_dict(doc):
    """Parse a forward-data document into (items, metadata)."""
    _validate(doc, DATA_SCHEMA, "data file")
    parse = trace_from_dict if doc["type"] == "traces" else moment_from_dict
    items = [parse(d) for d in doc["data"]]
    for it in items:
        if it.dim != doc["dim"]:
            raise SchemaError(f"sensor {it.sensor.tolist()} does not have dimension {doc['dim']}")
    meta = {k: doc.get(k) for k in ("type", "dim", "kind", "m")}
    try:
        meta["kernel"] = kernel_from_dict(doc["kernel"]) if "kernel" in doc else None
    except (ValueError, KeyError) as exc:
        raise SchemaError(f"invalid kernel: {exc}") from None
    return items, meta
