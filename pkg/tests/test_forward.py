import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from oracles import gaussian_trace
from smtprony import (DimensionMismatch, GaussianKernel, HyperplaneSources, MomentVector, PointSources,
                      Probe, RadialSources, hyperplane_moments, point_moments, radial_trace)
from smtprony.forward import counterexample_hyperplanes, counterexample_points, default_radii

EX42 = PointSources([[-1, 0], [1, 0]], [3, 2])
EX42_SENSORS = [[0, 0], [0, 2], [-1, 1], [1, 1], [1, 2]]
# rounded table from the worked example; the last entry is corrected to the exact value
EX42_TAU = [(5, 5, 5, 5), (5, 11.18, 25, 55.901), (5, 7.472, 13, 25.36),
            (5, 8.708, 17, 35.541), (5, 12.485, 32, 83.882)]


@pytest.mark.parametrize("i", range(5))
def test_example_moments(i):
    mv = point_moments(EX42, EX42_SENSORS[i], 4)
    np.testing.assert_allclose(mv.values, EX42_TAU[i], atol=5e-3)
    assert mv.values[0] == 5.0


def test_node_on_sensor_gives_tau0_sum():
    mv = point_moments(EX42, [-1, 0], 3)
    assert mv.values.tolist() == [5.0, 2 * 2.0, 2 * 4.0]


def test_sensor_dimension_checked():
    with pytest.raises(DimensionMismatch):
        point_moments(EX42, [0, 0, 0], 4)


@given(st.integers(0, 10_000))
def test_moments_rigid_motion_and_scaling(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    f = PointSources(rng.normal(size=(3, n)), rng.uniform(1, 3, 3))
    y = rng.normal(size=n)
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    b = rng.normal(size=n)
    g = PointSources(f.nodes @ q.T + b, f.amplitudes)
    np.testing.assert_allclose(point_moments(g, q @ y + b, 6).values, point_moments(f, y, 6).values, rtol=1e-10)
    s = rng.uniform(-3, 3)
    scaled = PointSources(f.nodes, s * f.amplitudes)
    np.testing.assert_allclose(point_moments(scaled, y, 6).values, s * point_moments(f, y, 6).values, rtol=1e-13)


def test_hyperplane_moments_normalization():
    f = HyperplaneSources([[0, 1]], [2.0], [5.0])
    mv = hyperplane_moments(f, [0.0, 0.5], 2)
    lam = math.exp(-1.5**2)
    np.testing.assert_allclose(mv.values, [5 * lam**l for l in (1, 2, 3, 4)], rtol=1e-14)
    raw = hyperplane_moments(f, [0.0, 0.5], 2, normalized=False)
    assert not raw.normalized
    np.testing.assert_allclose(raw.values, mv.values * (math.pi / np.arange(1, 5)) ** 0.5, rtol=1e-14)
    np.testing.assert_allclose(raw.as_normalized().values, mv.values, rtol=1e-14)


def test_raw_gaussian_moment_by_quadrature():
    # (R_y f)(h_l) for a line equals int_R exp(-l (d^2 + s^2)) ds times the amplitude
    from scipy import integrate
    f = HyperplaneSources([[0.6, 0.8]], [1.0], [2.0])
    y = np.array([0.3, -0.2])
    d = abs(1.0 - y @ f.normals[0])
    raw = hyperplane_moments(f, y, 1, normalized=False).values
    for l, v in zip((1, 2), raw):
        ref, _ = integrate.quad(lambda s: 2.0 * math.exp(-l * (d * d + s * s)), -np.inf, np.inf)
        assert v == pytest.approx(ref, rel=1e-10)


def test_moment_vector_validation():
    with pytest.raises(ValueError):
        MomentVector([0, 0], Probe.GAUSSIAN, [1, 2], 0)
    mv = MomentVector([0, 0], "gaussian", [1.0, 2.0])
    assert mv.first_index == 1 and mv.indices.tolist() == [1, 2]


@pytest.mark.parametrize("n", [2, 3])
def test_gaussian_trace_matches_closed_form(n):
    nodes = [[0.5, -0.3, 1.1][:n], [-0.7, 0.2, 0.0][:n]]
    f = RadialSources(nodes, [2.0, 1.3], GaussianKernel(1.0))
    y = np.array([0.1, 0.4, -0.5][:n])
    tr = radial_trace(f, y, np.linspace(0, 10, 101))
    ref = gaussian_trace(nodes, [2.0, 1.3], 1.0, y, tr.radii)
    np.testing.assert_allclose(tr.values, ref, rtol=1e-11, atol=1e-13)
    assert tr.values[0] == 0.0 and tr.covers_support


def test_trace_node_at_sensor_3d():
    f = RadialSources([[0.0, 0.0, 0.0]], [1.0], GaussianKernel(0.8))
    tr = radial_trace(f, [0.0, 0.0, 0.0], np.linspace(0, 8, 41))
    ref = gaussian_trace([[0, 0, 0]], [1.0], 0.8, np.zeros(3), tr.radii)
    np.testing.assert_allclose(tr.values, ref, rtol=1e-11, atol=1e-14)


@pytest.mark.parametrize("n", [2, 3])
def test_trace_integrates_to_total_mass(n):
    # integrating the trace over t gives the integral of f over R^n
    f = RadialSources([[0.3, 0.1, -0.2][:n]], [1.5], GaussianKernel(0.7))
    y = np.zeros(n)
    tr = radial_trace(f, y, default_radii(f, y, 2049))
    mass = 1.5 * (2 * math.pi * 0.7**2) ** (n / 2)
    assert integrate.simpson(tr.values, x=tr.radii) == pytest.approx(mass, rel=1e-6)


def test_default_radii_cover_support():
    f = RadialSources([[1.0, 1.0]], [1.0], GaussianKernel(1.0))
    r = default_radii(f, np.zeros(2))
    assert r.size == 512 and r[0] == 0.0
    assert r[-1] == pytest.approx(math.sqrt(2) + f.kernel.support_radius + 1.0)


def test_counterexample_points_collide():
    f1, f2, sensors = counterexample_points()
    for y in sensors:
        np.testing.assert_allclose(point_moments(f1, y, 8).values, point_moments(f2, y, 8).values,
                                   rtol=0, atol=1e-12)
        d = np.linalg.norm(f1.nodes - y, axis=1)
        assert abs(d[0] - d[1]) > 0.1


def test_counterexample_lines_collide():
    f1, f2, sensors = counterexample_hyperplanes()
    assert not f1.is_valid and "offsets must be positive" in f1.violations()
    assert len({tuple(np.round(np.append(t, r), 12)) for t, r in f1.canonical()}) == 2
    for y in sensors:
        np.testing.assert_allclose(hyperplane_moments(f1, y, 4).values, hyperplane_moments(f2, y, 4).values,
                                   rtol=0, atol=1e-12)
    y5 = sensors[4]
    assert abs(1.0 - 2.0) / math.sqrt(5) == pytest.approx(abs(f1.normals[0] @ y5 - f1.offsets[0]), abs=1e-15)
