"""Source models, sensor sets and the admissibility conditions on them."""

from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvalidModel
from .hankel import RadialKernel

EPS_GP = 1e-9
UNIT_TOL = 1e-12
_ZERO_TOL = 1e-12


class Theorem(str, Enum):
    POINTS = "points"
    HYPERPLANES = "hyperplanes"
    RADIAL = "radial"


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _as_points(points, dim=None):
    try:
        arr = np.array(points, dtype=float)
    except ValueError as exc:  # ragged input
        raise DimensionMismatch(f"points have inconsistent dimensions: {exc}") from None
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, dim or 0)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array of points, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatch(f"points have dimension {arr.shape[1]}, expected {dim}")
    return arr


def _pairwise_distinct(values, tol=0.0):
    values = np.asarray(values, dtype=float)
    for i, j in combinations(range(len(values)), 2):
        if np.all(np.abs(values[i] - values[j]) <= tol):
            return False
    return True


def canonical_hyperplane(theta, rho):
    """Canonical (theta, rho) for the set <x, theta> = rho.

    rho >= 0, and when rho == 0 the first nonzero component of theta is positive.
    """
    theta = np.asarray(theta, dtype=float)
    rho = float(rho)
    if rho < -_ZERO_TOL:
        return -theta, -rho
    if abs(rho) <= _ZERO_TOL:
        nz = np.flatnonzero(np.abs(theta) > _ZERO_TOL)
        if nz.size and theta[nz[0]] < 0:
            theta = -theta
        return theta, 0.0
    return theta.copy(), rho


@dataclass(frozen=True)
class PointSources:
    """Weighted point masses sum_k a_k delta_{x_k}."""

    nodes: np.ndarray
    amplitudes: np.ndarray
    dim: int = None

    def __post_init__(self):
        nodes = _as_points(self.nodes, self.dim)
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=float))
        if amps.ndim != 1 or amps.shape[0] != nodes.shape[0]:
            raise DimensionMismatch("one amplitude per node is required")
        object.__setattr__(self, "nodes", _frozen(nodes))
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "dim", int(nodes.shape[1]))

    @property
    def m(self):
        return self.nodes.shape[0]

    def violations(self):
        out = []
        if self.m < 1:
            out.append("at least one source is required")
        if self.dim < 2:
            out.append("dimension must be at least 2")
        if np.any(self.amplitudes == 0):
            out.append("amplitudes must be nonzero")
        if not _pairwise_distinct(self.nodes):
            out.append("nodes must be pairwise distinct")
        if not _pairwise_distinct(self.amplitudes):
            out.append("amplitudes must be pairwise distinct")
        return out

    @property
    def is_valid(self):
        return not self.violations()

    def require_valid(self):
        problems = self.violations()
        if problems:
            raise InvalidModel("; ".join(problems))
        return self


@dataclass(frozen=True)
class HyperplaneSources:
    """Weighted hyperplane measures sum_k a_k delta_{(theta_k, rho_k)}."""

    normals: np.ndarray
    offsets: np.ndarray
    amplitudes: np.ndarray
    dim: int = None

    def __post_init__(self):
        normals = _as_points(self.normals, self.dim)
        offsets = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=float))
        m = normals.shape[0]
        if offsets.shape != (m,) or amps.shape != (m,):
            raise DimensionMismatch("one offset and one amplitude per normal are required")
        object.__setattr__(self, "normals", _frozen(normals))
        object.__setattr__(self, "offsets", _frozen(offsets))
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "dim", int(normals.shape[1]))

    @property
    def m(self):
        return self.normals.shape[0]

    def canonical(self):
        """List of canonical (theta, rho) pairs, one per source."""
        return [canonical_hyperplane(t, r) for t, r in zip(self.normals, self.offsets)]

    def violations(self):
        out = []
        if self.m < 1:
            out.append("at least one source is required")
        if self.dim < 2:
            out.append("dimension must be at least 2")
        norms = np.linalg.norm(self.normals, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            out.append("normals must be unit vectors")
        if np.any(self.offsets <= 0):
            out.append("offsets must be positive")
        if np.any(self.amplitudes == 0):
            out.append("amplitudes must be nonzero")
        if not _pairwise_distinct(self.amplitudes):
            out.append("amplitudes must be pairwise distinct")
        canon = [np.append(t, r) for t, r in self.canonical()]
        if not _pairwise_distinct(canon, tol=1e-12):
            out.append("hyperplanes must be pairwise distinct")
        return out

    @property
    def is_valid(self):
        return not self.violations()

    def require_valid(self):
        problems = self.violations()
        if problems:
            raise InvalidModel("; ".join(problems))
        return self


@dataclass(frozen=True)
class RadialSources:
    """Translated copies of one radial kernel, f(x) = sum_k a_k g(|x - x_k|)."""

    nodes: np.ndarray
    amplitudes: np.ndarray
    kernel: RadialKernel
    dim: int = None

    def __post_init__(self):
        base = PointSources(self.nodes, self.amplitudes, self.dim)
        if not isinstance(self.kernel, RadialKernel):
            raise TypeError("kernel must be a RadialKernel")
        object.__setattr__(self, "nodes", base.nodes)
        object.__setattr__(self, "amplitudes", base.amplitudes)
        object.__setattr__(self, "dim", base.dim)

    @property
    def m(self):
        return self.nodes.shape[0]

    def as_points(self):
        return PointSources(self.nodes, self.amplitudes)

    def violations(self):
        out = self.as_points().violations()
        if not self.kernel.tail_ok():
            out.append("kernel does not decay below 1e-12 beyond its support radius")
        return out

    @property
    def is_valid(self):
        return not self.violations()

    def require_valid(self):
        problems = self.violations()
        if problems:
            raise InvalidModel("; ".join(problems))
        return self

    def __call__(self, x):
        """Evaluate f at points x of shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[:-1])
        for a, c in zip(self.amplitudes, self.nodes):
            total += a * self.kernel(np.linalg.norm(x - c, axis=-1))
        return total


@dataclass(frozen=True)
class SensorSet:
    """The finite set of sphere centers where the transform is observed."""

    points: np.ndarray
    dim: int = None

    def __post_init__(self):
        pts = _as_points(self.points, self.dim)
        if pts.shape[0] < 1:
            raise ValueError("a sensor set needs at least one point")
        if not _pairwise_distinct(pts):
            raise ValueError("sensor points must be pairwise distinct")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "dim", int(pts.shape[1]))

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]


def validate_general_position(sensors, eps=EPS_GP):
    """True iff no hyperplane contains n + 1 of the sensor points.

    Every (n+1)-subset is tested by the singular values of its n x n matrix
    of differences against the subset's first point, with rank threshold
    ``eps`` relative to the largest singular value.
    """
    pts = sensors.points if isinstance(sensors, SensorSet) else _as_points(sensors)
    N, n = pts.shape
    if N <= n:
        return True
    subsets = np.array(list(combinations(range(N), n + 1)), dtype=np.int64)
    ratios = _kernels.subset_singular_ratios(pts, subsets)
    return bool(np.all(ratios > eps))


def min_sensor_count(theorem, n, m):
    """Number of general-position sensors sufficient for unique recovery."""
    theorem = Theorem(theorem)
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    if theorem is Theorem.HYPERPLANES:
        return n * m * (m - 1) + 2 * n + 1
    return (n * m * (m - 1) + 2 * n + 2) // 2


def required_good_sensors(theorem, n):
    """Non-degenerate sensors the recovery actually consumes."""
    theorem = Theorem(theorem)
    if theorem is Theorem.HYPERPLANES:
        return 2 * n + 1
    return n + 1
