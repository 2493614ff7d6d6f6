import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smtprony import (AmbiguousAssignment, GaussianKernel, HyperplaneSources, InsufficientMoments,
                      NotEnoughGoodSensors, PointSources, RadialSources, SensorSet, compare_models,
                      point_moments, recover, recover_hyperplanes, recover_points, recover_radial, simulate)
from smtprony.cli import generate_scenario
from smtprony.forward import counterexample_points
from smtprony.io import dumps

EX42 = PointSources([[-1, 0], [1, 0]], [3, 2])
EX42_SENSORS = SensorSet([[0, 0], [0, 2], [-1, 1], [1, 1], [1, 2]])


def ex42_report():
    return recover_points(simulate(EX42, EX42_SENSORS), 2, 2, truth=EX42)


def test_example_scenario():
    rep = ex42_report()
    assert rep.ok
    assert [s.status for s in rep.sensors] == ["degenerate", "degenerate", "good", "good", "good"]
    assert [s.role for s in rep.sensors[2:]] == ["primary", "auxiliary", "auxiliary"]
    np.testing.assert_allclose(rep.model.amplitudes, [2.998, 2.001], atol=5e-3)
    np.testing.assert_allclose(rep.model.nodes[0], [-0.998, 0.001], atol=5e-3)
    assert np.linalg.norm(rep.model.nodes[1] - [1, 0]) <= 1e-2
    assert rep.errors["max"] <= 1e-10
    assert rep.verification["max_relative_misfit"] <= 1e-12


def test_degenerate_sensors_have_zero_determinant():
    from smtprony.prony import build_hankel
    for y in EX42_SENSORS[:2]:
        U = build_hankel(point_moments(EX42, y, 4), 2).matrix
        assert abs(np.linalg.det(U)) <= 1e-12


def test_m1_points():
    f = PointSources([[0.7, -1.2]], [2.5])
    rep = recover_points(simulate(f, SensorSet([[0, 0], [1, 0], [0, 1]])), 2, 1, truth=f)
    np.testing.assert_allclose(rep.model.nodes, f.nodes, atol=1e-10)
    np.testing.assert_allclose(rep.model.amplitudes, f.amplitudes, atol=1e-10)


@given(st.integers(0, 10_000))
@settings(max_examples=20)
def test_points_rigid_motion_equivariance(seed):
    rng = np.random.default_rng(seed)
    f, sensors = generate_scenario("points", 2, 2, seed)
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)))
    b = rng.normal(size=2)
    g = PointSources(f.nodes @ q.T + b, f.amplitudes)
    moved = SensorSet(sensors.points @ q.T + b)
    r1 = recover_points(simulate(f, sensors), 2, 2)
    r2 = recover_points(simulate(g, moved), 2, 2)
    np.testing.assert_allclose(r1.model.nodes @ q.T + b, r2.model.nodes, atol=1e-8)
    np.testing.assert_allclose(r1.model.amplitudes, r2.model.amplitudes, atol=1e-8)


def test_determinism_and_parallel_classification():
    f, sensors = generate_scenario("points", 3, 3, 11)
    data = simulate(f, sensors)
    a = dumps(recover_points(data, 3, 3).to_dict(include_timing=False))
    b = dumps(recover_points(data, 3, 3).to_dict(include_timing=False))
    c = dumps(recover_points(data, 3, 3, jobs=4).to_dict(include_timing=False))
    assert a == b == c


def test_extra_good_sensors_do_not_change_result():
    f, sensors = generate_scenario("points", 2, 3, 5)
    data = simulate(f, sensors)
    full = recover_points(data, 2, 3)
    fewer = recover_points(data[:-1], 2, 3)
    assert any("fewer than" in w for w in fewer.warnings)
    np.testing.assert_array_equal(full.model.nodes, fewer.model.nodes)


def test_not_enough_good_sensors():
    with pytest.raises(NotEnoughGoodSensors) as info:
        recover_points(simulate(EX42, EX42_SENSORS[:4]), 2, 2)
    assert info.value.report.status == "NotEnoughGoodSensors"
    assert info.value.report.model is None


def test_counterexample_refused():
    f1, _, sensors = counterexample_points()
    with pytest.raises(AmbiguousAssignment) as info:
        recover_points(simulate(f1, sensors), 2, 2)
    assert info.value.report.model is None


def test_input_checks():
    with pytest.raises(InsufficientMoments):
        recover_points([point_moments(EX42, y, 3) for y in EX42_SENSORS], 2, 2)
    with pytest.raises(ValueError):
        recover_points(simulate(EX42, EX42_SENSORS), 3, 2)
    with pytest.raises(TypeError):
        recover_points(simulate(EX42, EX42_SENSORS), 2, 2, tol_bogus=1)


def test_single_horizontal_line():
    f = HyperplaneSources([[0, 1]], [2.0], [5.0])
    sensors = SensorSet(np.random.default_rng(9).uniform(-3, 3, (9, 2)))
    rep = recover_hyperplanes(simulate(f, sensors), 2, 1, truth=f)
    assert rep.errors["max"] <= 1e-8


def test_sensor_on_the_hyperplane():
    f = HyperplaneSources([[0, 1]], [2.0], [5.0])
    sensors = SensorSet([[0.3, 2.0], [1, 0], [-1, 0.5], [2, 1.2], [-2, 3.1]])
    rep = recover_hyperplanes(simulate(f, sensors), 2, 1, truth=f)
    assert rep.sensors[0].diagnostics["roots"] == [1.0]
    assert rep.errors["max"] <= 1e-8


def test_random_line_pair():
    rng = np.random.default_rng(17)
    phi = rng.uniform(0, math.pi, 2)
    f = HyperplaneSources(np.c_[np.cos(phi), np.sin(phi)], rng.uniform(0.2, 3, 2), [1.0, 2.3])
    _, sensors = generate_scenario("hyperplanes", 2, 2, 17)
    rep = recover_hyperplanes(simulate(f, sensors), 2, 2, truth=f)
    assert rep.errors["max"] <= 1e-6


def test_raw_gaussian_moments_are_normalized_on_input():
    f, sensors = generate_scenario("hyperplanes", 3, 1, 4)
    from smtprony import hyperplane_moments
    raw = [hyperplane_moments(f, y, 1, normalized=False) for y in sensors]
    assert recover_hyperplanes(raw, 3, 1, truth=f).errors["max"] <= 1e-8


def test_radial_single_source_3d():
    f = RadialSources([[0.5, -0.3, 1.1]], [2.0], GaussianKernel(1.0))
    sensors = SensorSet([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    rep = recover_radial(simulate(f, sensors), f.kernel, 3, 1, truth=f)
    assert rep.errors["max_node"] <= 1e-4 and rep.errors["max_amplitude"] <= 1e-4


def test_radial_node_on_a_sensor():
    f = RadialSources([[1.0, 0.0]], [1.5], GaussianKernel(1.0))
    sensors = SensorSet([[1.0, 0.0], [-1, 0.5], [0.5, 2.0]])
    rep = recover_radial(simulate(f, sensors), f.kernel, 2, 1, truth=f)
    assert rep.sensors[0].diagnostics["roots"][0] == pytest.approx(0.0, abs=1e-5)
    assert rep.errors["max"] <= 1e-4


def test_radial_example_geometry_2d():
    f = RadialSources(EX42.nodes, EX42.amplitudes, GaussianKernel(1.0))
    rep = recover_radial(simulate(f, EX42_SENSORS), f.kernel, 2, 2, truth=f, jobs=2)
    assert [s.status for s in rep.sensors[:2]] == ["degenerate", "degenerate"]
    assert rep.errors["max_node"] <= 1e-3


def test_recover_dispatch():
    rep = recover("points", simulate(EX42, EX42_SENSORS), 2, 2)
    assert rep.kind == "points" and rep.ok
    with pytest.raises(ValueError):
        recover("radial", [], 2, 1)
    with pytest.raises(ValueError):
        recover("cones", [], 2, 1)


def test_compare_models_ignores_labels():
    f = PointSources([[0, 0], [1, 1]], [1, 2])
    g = PointSources([[1, 1], [0, 0]], [2, 1])
    out = compare_models(f, g)
    assert out["matching"] == [1, 0] and out["max"] == 0.0
    h1 = HyperplaneSources([[0, 1]], [1.0], [1.0])
    h2 = HyperplaneSources([[0, -1]], [-1.0], [1.0])
    assert compare_models(h1, h2)["max"] == 0.0
    with pytest.raises(ValueError):
        compare_models(f, h1)


def test_report_serializes():
    d = ex42_report().to_dict()
    assert d["status"] == "success" and d["model"]["kind"] == "points"
    assert d["sensors"][0]["status"] == "degenerate"
    assert "total" in d["timing"]
