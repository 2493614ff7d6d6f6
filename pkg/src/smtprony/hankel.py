"""Radial kernels, normalized Bessel functions and the order n/2 - 1 Hankel transform.

Also home of the even-moment extraction that turns a spherical-mean trace of a
sum of translated kernels into the power sums sum_j a_j |y - x_j|^(2k).
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.special import gamma

from . import _kernels
from .errors import GridTooCoarse, ProfileVanishes, QuadratureError, Unsupported

SUPPORT_LEVEL = 1e-12
SUPPORTED_DIMS = (2, 3)


def _check_dim(n):
    if n not in SUPPORTED_DIMS:
        raise Unsupported(f"dimension {n} is not supported (only n in {SUPPORTED_DIMS})")


def bessel_order(n):
    return 0.5 * n - 1.0


def normalized_bessel(nu, x):
    """j_nu(x) = x^-nu J_nu(x), continuous at 0 with j_nu(0) = 1 / (2^nu Gamma(nu + 1)).

    Accepts a scalar or an array; returns the same shape.
    """
    if nu < 0:
        raise ValueError("order must be nonnegative")
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValueError("argument must be nonnegative")
    if arr.ndim == 0:
        return _kernels.bessel_scalar(nu, float(arr))
    return _kernels.bessel_normalized(nu, arr)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

class RadialKernel:
    """A radial profile g(r) whose radial extension is smooth and rapidly decaying."""

    name = "abstract"

    def __call__(self, r):
        raise NotImplementedError

    @property
    def support_radius(self):
        """Radius beyond which |g| < 1e-12."""
        raise NotImplementedError

    @property
    def params(self):
        return {}

    def hankel_closed_form(self, lam, n):
        """Closed-form Hankel transform if the kernel knows one, else None."""
        return None

    def tail_ok(self):
        R = self.support_radius
        r = np.linspace(R, 3.0 * R, 257)
        # the cutoff itself may sit exactly at the level
        return bool(np.max(np.abs(self(r))) <= SUPPORT_LEVEL * (1.0 + 1e-9))

    def decay_radius(self, rel):
        """Smallest sampled r after which |g| stays below rel * max|g|."""
        R = self.support_radius
        r = np.linspace(0.0, R, 4097)
        v = np.abs(self(r))
        above = np.flatnonzero(v > rel * v.max())
        return float(r[above[-1]]) if above.size else 0.0

    def to_dict(self):
        return {"name": self.name, **self.params}

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self.to_dict()))

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"


class GaussianKernel(RadialKernel):
    """g(r) = exp(-r^2 / (2 s^2))."""

    name = "gaussian"

    def __init__(self, s=1.0):
        if not s > 0:
            raise ValueError("width must be positive")
        self.s = float(s)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-0.5 * (r / self.s) ** 2)

    @property
    def support_radius(self):
        return self.s * math.sqrt(2.0 * math.log(1.0 / SUPPORT_LEVEL))

    @property
    def params(self):
        return {"s": self.s}

    def decay_radius(self, rel):
        return self.s * math.sqrt(2.0 * math.log(1.0 / rel))

    def hankel_closed_form(self, lam, n):
        lam = np.asarray(lam, dtype=float)
        return self.s**n * np.exp(-0.5 * (self.s * lam) ** 2)


class TabulatedKernel(RadialKernel):
    """Cubic-spline profile through (radii, values); zero past the last radius."""

    name = "tabulated"

    def __init__(self, radii, values):
        radii = np.asarray(radii, dtype=float)
        values = np.asarray(values, dtype=float)
        if radii.ndim != 1 or radii.shape != values.shape or radii.size < 4:
            raise ValueError("need matching 1-D radii/values with at least 4 samples")
        if radii[0] != 0 or np.any(np.diff(radii) <= 0):
            raise ValueError("radii must start at 0 and increase strictly")
        self.radii = radii
        self.values = values
        # zero slope at the origin keeps the radial extension smooth
        self._spline = CubicSpline(radii, values, bc_type=((1, 0.0), "not-a-knot"))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.radii[-1], self._spline(np.clip(r, 0.0, self.radii[-1])), 0.0)
        return out if out.ndim else float(out)

    @property
    def support_radius(self):
        above = np.flatnonzero(np.abs(self.values) >= SUPPORT_LEVEL)
        return float(self.radii[min(above[-1] + 1, self.radii.size - 1)]) if above.size else 0.0

    @property
    def params(self):
        return {"radii": self.radii.tolist(), "values": self.values.tolist()}


class FunctionKernel(RadialKernel):
    """Wrap an arbitrary vectorized callable. Not serializable."""

    name = "function"

    def __init__(self, func, support_radius, label="function"):
        self._func = func
        self._support = float(support_radius)
        self.label = label

    def __call__(self, r):
        return self._func(np.asarray(r, dtype=float))

    @property
    def support_radius(self):
        return self._support

    @property
    def params(self):
        return {"label": self.label, "support_radius": self._support}

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)


KERNELS = {
    "gaussian": lambda spec: GaussianKernel(spec.get("s", 1.0)),
    "tabulated": lambda spec: TabulatedKernel(spec["radii"], spec["values"]),
}


def kernel_from_dict(spec):
    """Build a kernel from its JSON description, e.g. {"name": "gaussian", "s": 1.0}."""
    try:
        factory = KERNELS[spec["name"]]
    except KeyError:
        raise ValueError(f"unknown kernel {spec.get('name')!r}") from None
    return factory(spec)


# ---------------------------------------------------------------------------
# Hankel transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HankelProfile:
    order: float
    lambdas: np.ndarray
    values: np.ndarray

    @property
    def g_min(self):
        return float(np.min(np.abs(self.values)))

    def __call__(self, lam):
        return np.interp(lam, self.lambdas, self.values)


def _hankel_quad(kernel, n, lam, upper):
    nu = bessel_order(n)
    bessel = _kernels.bessel_scalar

    def integrand(r):
        return float(kernel(r)) * bessel(nu, lam * r) * r ** (n - 1)

    # oscillation count sets the subdivision budget
    limit = max(200, int(lam * upper) * 4)
    out = integrate.quad(integrand, 0.0, upper, epsabs=1e-13, epsrel=1e-10, limit=limit, full_output=1)
    if len(out) > 3:
        raise QuadratureError(f"Hankel quadrature did not converge at lambda={lam}: {out[3]}")
    return out[0]


def hankel_transform(kernel, n, lambda_grid, use_closed_form=True):
    """G(lambda) = int_0^inf g(r) j_{n/2-1}(lambda r) r^(n-1) dr on a lambda grid.

    Adaptive Gauss-Kronrod over [0, support radius] unless the kernel declares a
    closed form and ``use_closed_form`` is set.
    """
    _check_dim(n)
    lam = np.asarray(lambda_grid, dtype=float)
    if lam.ndim != 1 or lam.size == 0 or lam[0] != 0 or np.any(np.diff(lam) <= 0):
        raise ValueError("lambda grid must start at 0 and increase strictly")
    closed = kernel.hankel_closed_form(lam, n) if use_closed_form else None
    if closed is not None:
        values = np.asarray(closed, dtype=float)
    else:
        upper = kernel.support_radius
        if abs(float(kernel(upper))) >= SUPPORT_LEVEL * 10:
            raise QuadratureError("kernel support radius too small: kernel not negligible at the cutoff")
        values = np.array([_hankel_quad(kernel, n, float(v), upper) for v in lam])
    if not np.all(np.isfinite(values)):
        raise QuadratureError("non-finite Hankel transform values")
    return HankelProfile(bessel_order(n), lam, values)


# ---------------------------------------------------------------------------
# even moments from a spherical-mean trace
# ---------------------------------------------------------------------------

_GREGORY = [Fraction(1, 12), Fraction(1, 24), Fraction(19, 720), Fraction(3, 160),
            Fraction(863, 60480), Fraction(275, 24192), Fraction(33953, 3628800),
            Fraction(8183, 1036800)]


def gregory_weights(t, order=8):
    """End-corrected trapezoid weights on a uniform grid.

    The n = 2 trace integrand is odd at t = 0, which limits plain trapezoid to
    O(h^2); the Gregory corrections restore high order.
    """
    t = np.asarray(t, dtype=float)
    N = t.size - 1
    h = (t[-1] - t[0]) / N
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=0):
        raise ValueError("Gregory weights need a uniform grid")
    order = min(order, N // 2)
    w = np.full(N + 1, h)
    w[0] = w[-1] = 0.5 * h
    for k in range(1, order + 1):
        c = float(_GREGORY[k - 1]) * h
        for j in range(k + 1):
            w[j] -= c * (-1) ** k * (-1) ** (k - j) * math.comb(k, j)
            w[N - j] -= c * (-1) ** j * math.comb(k, j)
    return w


def moment_scale(k, n):
    """Factor turning the lambda^(2k) Taylor coefficient of sum_j a_j j_nu(lambda d_j)
    into sum_j a_j d_j^(2k)."""
    k = np.asarray(k)
    fact = np.array([math.factorial(int(i)) for i in np.atleast_1d(k)], dtype=float)
    return (-1.0) ** k * fact.reshape(np.shape(k)) * gamma(k + 0.5 * n) * 2.0 ** (2 * k + 0.5 * n - 1)


@dataclass(frozen=True)
class EvenMoments:
    """mu_{2k} = sum_j a_j |y - x_j|^(2k), k = 0..2m-1, plus fit diagnostics."""

    values: np.ndarray
    lambdas: np.ndarray
    phi: np.ndarray
    n_terms: int
    fit_residual: float


def extract_even_moments(trace, kernel, n, m, n_lambda=64, window=4.0, n_terms=None,
                         g_min_rel=1e-6, tol_fit=1e-8):
    """Even power sums of the source distances from one spherical-mean trace.

    Phi(lambda) = (2 pi)^(-n/2) int (R_y f)(t) j_nu(lambda t) dt / G(lambda) equals
    sum_j a_j j_nu(lambda |y - x_j|). Its even Taylor coefficients are fitted by
    least squares on [0, lambda_max] and rescaled to mu_{2k}.

    ``window`` is the target for lambda_max times the largest distance, estimated
    from where the trace dies out; ``n_terms`` defaults to max(12, 2m + 6).
    """
    _check_dim(n)
    t = np.asarray(trace.radii, dtype=float)
    R = np.asarray(trace.values, dtype=float)
    peak = np.max(np.abs(R))
    if peak == 0:
        raise ProfileVanishes("trace is identically zero")
    if abs(R[-1]) > 1e-8 * peak:
        raise GridTooCoarse("trace does not cover the support of f (nonzero at the last radius)")
    nu = bessel_order(n)

    live = np.flatnonzero(np.abs(R) > 1e-8 * peak)
    r8 = kernel.decay_radius(1e-8)
    d_est = max(t[live[-1]] - r8, 0.25 * r8, 1e-3)
    lam_max = window / d_est

    # keep |G| above g_min_rel * max|G|
    probe = hankel_transform(kernel, n, np.linspace(0.0, lam_max, 129))
    gabs = np.abs(probe.values)
    bad = np.flatnonzero(gabs <= g_min_rel * gabs.max())
    if bad.size:
        if bad[0] < 8:
            raise ProfileVanishes("Hankel transform of the kernel vanishes too close to 0")
        lam_max = probe.lambdas[bad[0] - 1]

    lam = np.linspace(0.0, lam_max, n_lambda)
    G = hankel_transform(kernel, n, lam).values
    w = gregory_weights(t) if np.allclose(np.diff(t), t[1] - t[0], rtol=1e-9) else None
    J = _kernels.bessel_normalized(nu, np.outer(lam, t))
    if w is not None:
        integral = J @ (R * w)
    else:
        integral = integrate.simpson(R[None, :] * J, x=t, axis=1)
    phi = (2.0 * math.pi) ** (-0.5 * n) * integral / G

    K = n_terms or max(12, 2 * m + 6)
    if K < 2 * m:
        raise ValueError("need at least 2m fit terms")
    s2 = (lam / lam_max) ** 2
    A = np.vander(s2, K, increasing=True)
    beta, *_ = np.linalg.lstsq(A, phi, rcond=None)
    resid = float(np.max(np.abs(A @ beta - phi)) / np.max(np.abs(phi)))
    if resid > tol_fit:
        raise GridTooCoarse(f"even-polynomial fit residual {resid:.2e} exceeds {tol_fit:.0e}")
    k = np.arange(2 * m)
    beta = beta[: 2 * m] / lam_max ** (2 * k)
    mu = beta * moment_scale(k, n)
    return EvenMoments(mu, lam, phi, K, resid)
