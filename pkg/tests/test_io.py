import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smtprony import GaussianKernel, HyperplaneSources, PointSources, RadialSources, SchemaError, SensorSet, simulate
from smtprony import io
from smtprony.hankel import TabulatedKernel


def roundtrip_scenario(model, sensors):
    text = io.dumps(io.scenario_to_dict(model, sensors))
    return io.scenario_from_dict(io.loads(text))


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=2),
       st.floats(1e-300, 1e300))
def test_floats_round_trip_exactly(node, amp):
    f = PointSources([node], [amp])
    g, sensors = roundtrip_scenario(f, SensorSet([[0.1, 0.2]]))
    assert np.array_equal(g.nodes, f.nodes) and np.array_equal(g.amplitudes, f.amplitudes)
    assert np.array_equal(sensors.points, [[0.1, 0.2]])


def test_all_model_kinds_round_trip():
    models = [
        PointSources([[1, 2, 3]], [0.5]),
        HyperplaneSources([[0.6, 0.8]], [1.25], [2.0]),
        RadialSources([[0, 1]], [1.0], GaussianKernel(0.7)),
        RadialSources([[0, 1]], [1.0], TabulatedKernel([0, 1, 2, 3], [1, 0.5, 0.1, 0])),
    ]
    for f in models:
        g, _ = roundtrip_scenario(f, SensorSet(np.zeros((1, f.dim))))
        assert io.model_to_dict(g).keys() == io.model_to_dict(f).keys()
        assert io.dumps(io.model_to_dict(g)) == io.dumps(io.model_to_dict(f))


def test_data_documents_round_trip():
    f = PointSources([[-1, 0], [1, 0]], [3, 2])
    items = simulate(f, SensorSet([[0, 0], [1, 1]]))
    doc = io.loads(io.dumps(io.data_to_dict(items, "points", 2)))
    back, meta = io.data_from_dict(doc)
    assert meta["kind"] == "points" and meta["m"] == 2 and meta["dim"] == 2
    assert all(np.array_equal(a.values, b.values) for a, b in zip(items, back))

    r = RadialSources([[0, 0]], [1.0], GaussianKernel())
    traces = simulate(r, SensorSet([[1, 0]]), radii=np.linspace(0, 10, 21))
    back, meta = io.data_from_dict(io.loads(io.dumps(io.data_to_dict(traces, "radial", 1, r.kernel))))
    assert meta["kernel"] == r.kernel
    assert np.array_equal(back[0].radii, traces[0].radii)


@pytest.mark.parametrize("doc", [
    {"dim": 2, "model": {"kind": "points", "amplitudes": [1]}, "sensors": [[0, 0]]},
    {"dim": 2, "model": {"kind": "cones", "amplitudes": [1]}, "sensors": [[0, 0]]},
    {"dim": 2, "model": {"kind": "points", "nodes": [[0, 0]], "amplitudes": [1]}, "sensors": []},
    {"dim": 2, "model": {"kind": "points", "nodes": [[0, 0, 0]], "amplitudes": [1]}, "sensors": [[0, 0]]},
    {"dim": 2, "model": {"kind": "radial", "nodes": [[0, 0]], "amplitudes": [1], "kernel": {"name": "x"}},
     "sensors": [[0, 0]]},
    {"dim": 2, "model": {"kind": "points", "nodes": [[0, 0]], "amplitudes": [1]}, "sensors": [[0, 0], [0, 0]]},
])
def test_invalid_scenarios(doc):
    with pytest.raises(SchemaError):
        io.scenario_from_dict(doc)


def test_invalid_data_documents():
    with pytest.raises(SchemaError):
        io.data_from_dict({"type": "moments", "dim": 2, "data": [{"sensor": [0, 0], "probe": "cubic", "values": [1]}]})
    with pytest.raises(SchemaError):
        io.data_from_dict({"type": "moments", "dim": 3, "data": [{"sensor": [0, 0], "probe": "monomial", "values": [1]}]})
    with pytest.raises(SchemaError):
        io.loads("{not json")
    with pytest.raises(SchemaError):
        io.dumps({"x": float("nan")})


def test_numpy_values_serialize():
    text = io.dumps({"a": np.float64(0.1), "b": np.arange(3), "c": np.bool_(True)})
    assert json.loads(text) == {"a": 0.1, "b": [0, 1, 2], "c": True}
