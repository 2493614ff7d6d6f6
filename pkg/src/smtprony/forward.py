"""Synthesize the data the recovery procedures consume.

Monomial-probe moments for point sources, Gaussian-probe moments for
hyperplane sources, sampled spherical means for radial sources, and the two
colliding-amplitude constructions that show why distinct amplitudes matter.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import DimensionMismatch, QuadratureError, Unsupported
from .hankel import SUPPORTED_DIMS
from .model import HyperplaneSources, PointSources, SensorSet

CIRCLE_NODES = 4096
DEFAULT_SAMPLES = 512


class Probe(str, Enum):
    MONOMIAL = "monomial"  # h_l(t) = t^l,         l = 0, 1, ...
    GAUSSIAN = "gaussian"  # h_l(t) = exp(-l t^2), l = 1, 2, ...


def _frozen(a):
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MomentVector:
    """Probe evaluations tau_l of R_y f for consecutive l starting at ``first_index``.

    For Gaussian probes ``values`` are normalized, i.e. multiplied by
    (pi / l)^(-(n-1)/2), whenever ``normalized`` is set.
    """

    sensor: np.ndarray
    probe: Probe
    values: np.ndarray
    first_index: int = None
    normalized: bool = False

    def __post_init__(self):
        probe = Probe(self.probe)
        first = self.first_index
        if first is None:
            first = 0 if probe is Probe.MONOMIAL else 1
        if probe is Probe.GAUSSIAN and first < 1:
            raise ValueError("Gaussian probes start at l = 1")
        object.__setattr__(self, "probe", probe)
        object.__setattr__(self, "first_index", int(first))
        object.__setattr__(self, "sensor", _frozen(self.sensor))
        object.__setattr__(self, "values", _frozen(np.atleast_1d(self.values)))
        object.__setattr__(self, "normalized", bool(self.normalized) and probe is Probe.GAUSSIAN)

    @property
    def dim(self):
        return self.sensor.shape[0]

    @property
    def indices(self):
        return np.arange(self.first_index, self.first_index + len(self.values))

    def __len__(self):
        return len(self.values)

    def _factor(self):
        # (pi / l)^((n - 1) / 2): raw = factor * normalized
        return (math.pi / self.indices) ** (0.5 * (self.dim - 1))

    def raw(self):
        """(R_y f)(h_l) itself."""
        if self.probe is Probe.GAUSSIAN and self.normalized:
            return self.values * self._factor()
        return np.array(self.values)

    def normalized_values(self):
        if self.probe is not Probe.GAUSSIAN or self.normalized:
            return np.array(self.values)
        return self.values / self._factor()

    def as_normalized(self):
        return MomentVector(self.sensor, self.probe, self.normalized_values(), self.first_index,
                            self.probe is Probe.GAUSSIAN)


@dataclass(frozen=True)
class SphericalMeanTrace:
    """Samples of (R_y f)(t) = t^(n-1) int_{S^(n-1)} f(y + t theta) dtheta."""

    sensor: np.ndarray
    radii: np.ndarray
    values: np.ndarray
    covers_support: bool = True

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if radii.ndim != 1 or radii.shape != values.shape:
            raise ValueError("radii and values must be matching 1-D arrays")
        if radii.size < 2 or radii[0] < 0 or np.any(np.diff(radii) <= 0):
            raise ValueError("radii must be nonnegative and strictly increasing")
        object.__setattr__(self, "sensor", _frozen(self.sensor))
        object.__setattr__(self, "radii", _frozen(radii))
        object.__setattr__(self, "values", _frozen(values))

    @property
    def dim(self):
        return self.sensor.shape[0]


def _sensor(y, dim):
    y = np.asarray(y, dtype=float)
    if y.shape != (dim,):
        raise DimensionMismatch(f"sensor has shape {y.shape}, model dimension is {dim}")
    return y


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

def point_moments(model, y, count):
    """tau_l = sum_k a_k |y - x_k|^l for l = 0..count-1."""
    if count < 1:
        raise ValueError("count must be at least 1")
    y = _sensor(y, model.dim)
    d = np.linalg.norm(model.nodes - y, axis=1)
    powers = np.arange(count)
    # 0 ** 0 == 1 keeps tau_0 = sum a_k when a node sits on the sensor
    values = (d[None, :] ** powers[:, None]) @ model.amplitudes
    return MomentVector(y, Probe.MONOMIAL, values, 0)


def hyperplane_distances(model, y):
    return np.abs(model.offsets - model.normals @ y)


def hyperplane_moments(model, y, m, normalized=True):
    """Gaussian-probe moments for l = 1..2m.

    The normalized value is sum_k a_k lambda_k^l with
    lambda_k = exp(-(rho_k - <y, theta_k>)^2).
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    y = _sensor(y, model.dim)
    lam = np.exp(-hyperplane_distances(model, y) ** 2)
    ls = np.arange(1, 2 * m + 1)
    values = (lam[None, :] ** ls[:, None]) @ model.amplitudes
    mv = MomentVector(y, Probe.GAUSSIAN, values, 1, True)
    return mv if normalized else MomentVector(y, Probe.GAUSSIAN, mv.raw(), 1, False)


# ---------------------------------------------------------------------------
# spherical-mean traces
# ---------------------------------------------------------------------------

def default_radii(model, y, samples=DEFAULT_SAMPLES):
    """Uniform grid on [0, T], T = max_k |y - x_k| + kernel support radius + 1."""
    y = _sensor(y, model.dim)
    T = np.max(np.linalg.norm(model.nodes - y, axis=1)) + model.kernel.support_radius + 1.0
    return np.linspace(0.0, T, samples)


def _sphere_integral_3d(kernel, d, t):
    """int_{S^2} g(|c + t theta|) dtheta for a center at distance d."""
    if t == 0.0:
        return 4.0 * math.pi * float(kernel(d))
    if d < 1e-12:
        return 4.0 * math.pi * float(kernel(t))
    lo, hi = abs(d - t), d + t
    # past the support the kernel is below 1e-12, but the 2 pi t / d prefactor
    # would magnify a truncated tail, so only skip intervals lying wholly outside
    if lo >= 2.0 * kernel.support_radius:
        return 0.0
    out = integrate.quad(lambda u: float(kernel(u)) * u, lo, hi,
                         epsabs=1e-15, epsrel=1e-13, limit=200, full_output=1)
    if len(out) > 3:
        raise QuadratureError(f"sphere reduction integral did not converge: {out[3]}")
    return 2.0 * math.pi / (d * t) * out[0]


def radial_trace(model, y, radii=None):
    """Sample (R_y f)(t) on ``radii`` (default: ``default_radii``).

    n = 2 uses a periodic trapezoid rule with 4096 nodes on the circle; n = 3 reduces
    each sphere integral to one dimension and integrates adaptively.
    """
    n = model.dim
    if n not in SUPPORTED_DIMS:
        raise Unsupported(f"dimension {n} is not supported for spherical means")
    y = _sensor(y, n)
    radii = default_radii(model, y) if radii is None else np.asarray(radii, dtype=float)
    dists = np.linalg.norm(model.nodes - y, axis=1)
    covers = bool(radii[-1] >= dists.max() + model.kernel.support_radius)

    if n == 2:
        phi = 2.0 * math.pi * np.arange(CIRCLE_NODES) / CIRCLE_NODES
        circle = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        values = np.empty(radii.shape[0])
        for q, t in enumerate(radii):
            pts = y + t * circle
            values[q] = t * (2.0 * math.pi / CIRCLE_NODES) * np.sum(model(pts))
    else:
        values = np.zeros(radii.shape[0])
        for a, d in zip(model.amplitudes, dists):
            for q, t in enumerate(radii):
                values[q] += a * t * t * _sphere_integral_3d(model.kernel, float(d), float(t))
    return SphericalMeanTrace(y, radii, values, covers)


# ---------------------------------------------------------------------------
# colliding-amplitude constructions
# ---------------------------------------------------------------------------

def counterexample_points():
    """Two unit-amplitude point pairs indistinguishable from three sensors."""
    f1 = PointSources([[0.0, 1.0], [2.0, -1.0]], [1.0, 1.0])
    f2 = PointSources([[0.0, -1.0], [2.0, 1.0]], [1.0, 1.0])
    sensors = SensorSet([[0.0, 0.0], [2.0, 0.0], [1.0, 1.0]])
    return f1, f2, sensors


def counterexample_hyperplanes():
    """Two line pairs through the origin indistinguishable from five sensors.

    l1: x - 2y = 0, l2: 2x + y = 0 against k1: x + 2y = 0, k2: 2x - y = 0. The
    lines pass through the origin (rho = 0), so these models are flagged invalid;
    they exist to exercise moment collisions.
    """
    s5 = math.sqrt(5.0)
    f1 = HyperplaneSources([[1 / s5, -2 / s5], [2 / s5, 1 / s5]], [0.0, 0.0], [1.0, 1.0])
    f2 = HyperplaneSources([[1 / s5, 2 / s5], [2 / s5, -1 / s5]], [0.0, 0.0], [1.0, 1.0])
    sensors = SensorSet([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0], [1.0, 1.0]])
    return f1, f2, sensors
