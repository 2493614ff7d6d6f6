import math

import numpy as np
import pytest
from scipy.special import gamma

from oracles import sphere_average_radial
from smtprony import (GaussianKernel, PointSources, RadialSources, TabulatedKernel, extract_even_moments,
                      hankel_transform, normalized_bessel, radial_trace)
from smtprony.errors import GridTooCoarse, ProfileVanishes, QuadratureError, Unsupported
from smtprony.forward import SphericalMeanTrace, default_radii
from smtprony.hankel import FunctionKernel, gregory_weights, kernel_from_dict, moment_scale


def gaussian_by_quadrature():
    return FunctionKernel(lambda r: np.exp(-0.5 * r * r), math.sqrt(2 * math.log(1e12)), "gauss")


@pytest.mark.parametrize("n", [2, 3])
def test_gaussian_self_transform(n):
    lam = np.linspace(0, 5, 51)
    G = hankel_transform(gaussian_by_quadrature(), n, lam, use_closed_form=False).values
    np.testing.assert_allclose(G, np.exp(-0.5 * lam**2), rtol=0, atol=1e-8)
    closed = hankel_transform(GaussianKernel(1.0), n, lam).values
    np.testing.assert_allclose(closed, np.exp(-0.5 * lam**2), rtol=1e-15)


@pytest.mark.parametrize("n", [2, 3])
def test_transform_at_zero_is_scaled_mass(n):
    g = FunctionKernel(lambda r: (1 + r * r) * np.exp(-r * r), 6.0)
    G0 = hankel_transform(g, n, np.array([0.0])).values[0]
    # int (1 + r^2) e^{-r^2} r^{n-1} dr times j_nu(0)
    mass = {2: 0.5 + 0.5, 3: math.sqrt(math.pi) / 4 + 3 * math.sqrt(math.pi) / 8}[n]
    assert G0 == pytest.approx(mass / (2 ** (n / 2 - 1) * math.gamma(n / 2)), rel=1e-10)


@pytest.mark.parametrize("n", [2, 3])
def test_self_reciprocity(n):
    g = FunctionKernel(lambda r: (1 + r * r) * np.exp(-0.5 * r * r), 9.0)
    lam = np.linspace(0, 10, 2001)
    G = hankel_transform(g, n, lam).values
    back = hankel_transform(TabulatedKernel(lam, G), n, np.linspace(0, 3, 31)).values
    r = np.linspace(0, 3, 31)
    np.testing.assert_allclose(back, g(r), rtol=0, atol=1e-6)


@pytest.mark.parametrize("n", [2, 3])
def test_bessel_product_identity(n):
    nu = n / 2 - 1
    rng = np.random.default_rng(42 + n)
    for _ in range(20):
        x = rng.uniform(-2, 2, n)
        r = rng.uniform(0, 3)
        lam = rng.uniform(0, 4)
        lhs = sphere_average_radial(lambda s: normalized_bessel(nu, lam * s), x, r, n)
        rhs = (2 * math.pi) ** (n / 2) * normalized_bessel(nu, lam * r) * normalized_bessel(nu, lam * np.linalg.norm(x))
        assert lhs == pytest.approx(rhs, abs=1e-6)


def test_moment_scale_low_orders():
    # the scale inverts the x^(2k) Taylor coefficient of j_nu: (-1)^k / (k! Gamma(k + nu + 1) 2^(2k + nu))
    for n in (2, 3):
        nu = n / 2 - 1
        for k in (0, 1, 2):
            taylor = (-1) ** k / (math.factorial(k) * gamma(k + nu + 1) * 2 ** (2 * k + nu))
            assert moment_scale(k, n) * taylor == pytest.approx(1.0, rel=1e-14)


def test_gregory_weights_integrate_odd_start():
    t = np.linspace(0, 3, 61)
    w = gregory_weights(t)
    assert w @ (t * np.exp(-t)) == pytest.approx(1 - 4 * math.exp(-3), rel=1e-10)
    with pytest.raises(ValueError):
        gregory_weights(np.array([0, 1, 3, 4.0]))


def test_kernel_registry():
    assert kernel_from_dict({"name": "gaussian", "s": 2.0}) == GaussianKernel(2.0)
    with pytest.raises(ValueError):
        kernel_from_dict({"name": "nope"})


def test_unsupported_dimension():
    with pytest.raises(Unsupported):
        hankel_transform(GaussianKernel(), 4, np.linspace(0, 1, 5))


def test_short_support_rejected():
    g = FunctionKernel(lambda r: np.exp(-0.5 * r * r), 2.0)
    with pytest.raises(QuadratureError):
        hankel_transform(g, 2, np.linspace(0, 1, 3))


def test_even_moments_single_source_3d():
    f = RadialSources([[1.5, 0, 0]], [2.0], GaussianKernel(1.0))
    tr = radial_trace(f, np.zeros(3))
    em = extract_even_moments(tr, f.kernel, 3, 1)
    assert em.values[0] == pytest.approx(2.0, abs=1e-6)
    assert em.values[1] == pytest.approx(4.5, abs=1e-4)


def test_even_moments_example_geometry_2d():
    f = RadialSources([[-1, 0], [1, 0]], [3.0, 2.0], GaussianKernel(1.0))
    for y in ([-1, 1], [1, 1], [1, 2]):
        tr = radial_trace(f, np.array(y, float))
        em = extract_even_moments(tr, f.kernel, 2, 2)
        d2 = np.sum((f.nodes - y) ** 2, axis=1)
        ref = [np.sum(f.amplitudes * d2**k) for k in range(4)]
        np.testing.assert_allclose(em.values, ref, rtol=1e-3)


def test_even_moments_linear_in_trace():
    f = RadialSources([[0.3, -0.4]], [1.7], GaussianKernel(1.0))
    tr = radial_trace(f, np.zeros(2))
    twice = SphericalMeanTrace(tr.sensor, tr.radii, 2 * tr.values)
    a = extract_even_moments(tr, f.kernel, 2, 1).values
    b = extract_even_moments(twice, f.kernel, 2, 1).values
    np.testing.assert_allclose(b, 2 * a, rtol=1e-12)


def test_zero_order_coefficient_is_total_amplitude():
    f = RadialSources([[0.3, -0.4, 0.2], [-0.5, 0.1, 0.6]], [1.0, 2.5], GaussianKernel(1.0))
    tr = radial_trace(f, np.zeros(3))
    em = extract_even_moments(tr, f.kernel, 3, 2)
    assert em.values[0] == pytest.approx(3.5, rel=1e-8)
    assert em.fit_residual <= 1e-8


def test_trace_must_cover_support():
    f = RadialSources([[0.3, -0.4]], [1.7], GaussianKernel(1.0))
    tr = radial_trace(f, np.zeros(2), np.linspace(0, 3, 100))
    with pytest.raises(GridTooCoarse):
        extract_even_moments(tr, f.kernel, 2, 1)
    zero = SphericalMeanTrace(np.zeros(2), np.linspace(0, 3, 10), np.zeros(10))
    with pytest.raises(ProfileVanishes):
        extract_even_moments(zero, f.kernel, 2, 1)
