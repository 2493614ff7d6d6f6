"""Prony engine: Hankel assembly, degeneracy test, coefficient solve, roots, amplitudes.

For moments tau_l = sum_i a_i xi_i^l the monic polynomial with roots xi_i has
coefficients c solving U c = rhs, where U is the m x m Hankel matrix of the
moments (starting at tau_0 for monomial probes and tau_1 for Gaussian probes).
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (ComplexRoots, DegenerateSystem, InconsistentMoments, InsufficientMoments,
                     OutOfRangeRoots, RepeatedRoots)
from .forward import MomentVector, Probe

EPS_DEGENERATE = 1e-8
TOL_IM = 1e-7
TOL_SEP = 1e-6
TOL_RES = 1e-6
TOL_RANGE = 1e-7


@dataclass(frozen=True)
class HankelSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    offset: int
    probe: Probe
    sigma_min: float
    sigma_max: float

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def condition_ratio(self):
        """sigma_min / sigma_max (0 for the zero matrix)."""
        return self.sigma_min / self.sigma_max if self.sigma_max > 0 else 0.0


@dataclass(frozen=True)
class PronySolution:
    coefficients: np.ndarray
    roots: np.ndarray
    amplitudes: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "coefficients": self.coefficients.tolist(),
            "roots": self.roots.tolist(),
            "amplitudes": self.amplitudes.tolist(),
            "diagnostics": dict(self.diagnostics),
        }


def _values(moments):
    if isinstance(moments, MomentVector):
        vals = moments.normalized_values()
        return vals, moments.probe, moments.first_index
    vals = np.asarray(moments, dtype=float)
    return vals, Probe.MONOMIAL, 0


def build_hankel(moments, m):
    """Assemble U[i, j] = tau_{i+j+s} and rhs = -(tau_{m+s}, ..., tau_{2m-1+s}).

    s = 0 for monomial probes, s = 1 for Gaussian probes. A bare sequence is
    read as monomial moments tau_0, tau_1, ...
    """
    vals, probe, first = _values(moments)
    if m < 1:
        raise ValueError("m must be at least 1")
    if vals.shape[0] < 2 * m:
        raise InsufficientMoments(f"need {2 * m} moments, got {vals.shape[0]}")
    offset = 0 if probe is Probe.MONOMIAL else 1
    if first != offset:
        raise InsufficientMoments(f"{probe.value} moments must start at l = {offset}")
    U = scipy.linalg.hankel(vals[:m], vals[m - 1: 2 * m - 1])
    rhs = -vals[m: 2 * m]
    sv = np.linalg.svd(U, compute_uv=False)
    return HankelSystem(U, rhs, offset, probe, float(sv[-1]), float(sv[0]))


def is_degenerate(system, eps=EPS_DEGENERATE):
    """True iff sigma_min(U) < eps * sigma_max(U)."""
    if system.sigma_max == 0:
        return True
    return system.sigma_min < eps * system.sigma_max


def solve_coefficients(system, eps=EPS_DEGENERATE):
    """Coefficients c_0..c_{m-1} of the monic polynomial, by LU with partial pivoting."""
    if is_degenerate(system, eps):
        raise DegenerateSystem(
            f"Hankel matrix is numerically singular (sigma ratio {system.condition_ratio:.3e})")
    return scipy.linalg.solve(system.matrix, system.rhs, assume_a="gen")


def coefficient_residual(system, coefficients):
    """||U c - rhs|| / ||rhs||."""
    r = system.matrix @ coefficients - system.rhs
    scale = np.linalg.norm(system.rhs)
    return float(np.linalg.norm(r) / scale) if scale > 0 else float(np.linalg.norm(r))


def companion(coefficients):
    """Companion matrix of c_0 + c_1 t + ... + c_{m-1} t^{m-1} + t^m."""
    c = np.asarray(coefficients, dtype=float)
    m = c.shape[0]
    C = np.zeros((m, m))
    if m > 1:
        C[1:, :-1] = np.eye(m - 1)
    C[:, -1] = -c
    return C


def check_range(roots, probe, tol_range):
    if probe is Probe.MONOMIAL:
        if np.any(roots < -tol_range * (1.0 + np.abs(roots))):
            raise OutOfRangeRoots(f"negative root {roots[0]:.6g} cannot be a distance")
        return np.maximum(roots, 0.0)
    if np.any(roots <= 0) or np.any(roots > 1.0 + tol_range):
        raise OutOfRangeRoots(f"roots {roots} outside (0, 1]")
    return np.minimum(roots, 1.0)


def find_roots(coefficients, probe=Probe.MONOMIAL, tol_im=TOL_IM, tol_range=TOL_RANGE,
               return_imag=False):
    """Real roots of the monic polynomial, ascending, via companion eigenvalues.

    Monomial probes need roots >= 0 (they are distances); Gaussian probes need
    roots in (0, 1] (they are exp(-d^2)). Values within ``tol_range`` of the
    admissible range are clipped into it. ``probe=None`` skips the range check.
    """
    z = np.linalg.eigvals(companion(coefficients))
    im = np.abs(z.imag)
    max_im = float(im.max()) if im.size else 0.0
    if np.any(im > tol_im * (1.0 + np.abs(z.real))):
        raise ComplexRoots(f"polynomial has non-real roots (max |Im| = {max_im:.3e})")
    roots = np.sort(z.real)
    if probe is not None:
        roots = check_range(roots, Probe(probe), tol_range)
    return (roots, max_im) if return_imag else roots


@dataclass(frozen=True)
class Standardized:
    """Monomial moments of the shifted and scaled nodes (xi - shift) / scale."""

    moments: MomentVector
    shift: float
    scale: float

    def roots_back(self, r):
        return self.shift + self.scale * np.asarray(r, dtype=float)


def standardize(moments):
    """Re-express monomial moments around the weighted mean node.

    The binomial transform w_l = sum_j C(l, j) (-c)^(l-j) tau_j / D^l with
    c = tau_1 / tau_0 and D = sqrt(tau_2 / tau_0) gives the moments of the
    nodes (xi - c) / D. Rank is unchanged, but the Hankel matrix is far better
    conditioned and its singular-value ratio no longer depends on the length
    unit. When tau_0, tau_1, tau_2 do not define a sensible center (mixed-sign
    amplitudes) the moments are returned unchanged.
    """
    if isinstance(moments, MomentVector):
        if moments.probe is not Probe.MONOMIAL or moments.first_index != 0:
            raise ValueError("standardization applies to monomial moments from l = 0")
        sensor = moments.sensor
    else:
        sensor = np.zeros(1)
    tau = _values(moments)[0]
    shift, scale = 0.0, 1.0
    if tau.shape[0] >= 3 and tau[0] != 0:
        c = tau[1] / tau[0]
        q = tau[2] / tau[0]
        if c >= 0 and q > 0 and c * c <= q * (1 + 1e-12):
            shift, scale = float(c), float(math.sqrt(q))
    L = tau.shape[0]
    if shift == 0.0 and scale == 1.0:
        w = tau.copy()
    else:
        w = np.empty(L)
        for l in range(L):
            j = np.arange(l + 1)
            binom = np.array([math.comb(l, int(i)) for i in j], dtype=float)
            w[l] = np.sum(binom * (-shift) ** (l - j) * tau[: l + 1]) / scale**l
    return Standardized(MomentVector(sensor, Probe.MONOMIAL, w, 0), shift, scale)


def _vandermonde(roots, first_power, rows):
    powers = first_power + np.arange(rows)
    return roots[None, :] ** powers[:, None]


def amplitude_residual(roots, amplitudes, moments):
    """Relative misfit of sum_i a_i xi_i^l against every supplied moment."""
    vals, _, first = _values(moments)
    V = _vandermonde(np.asarray(roots, dtype=float), first, vals.shape[0])
    scale = np.linalg.norm(vals)
    r = np.linalg.norm(V @ amplitudes - vals)
    return float(r / scale) if scale > 0 else float(r)


def solve_amplitudes(roots, moments, tol_sep=TOL_SEP, tol_res=TOL_RES):
    """Amplitudes from the top m x m Vandermonde block.

    The remaining moments serve as a consistency check: a relative residual
    above ``tol_res`` raises InconsistentMoments (pass ``tol_res=None`` to skip).
    """
    roots = np.asarray(roots, dtype=float)
    vals, _, first = _values(moments)
    m = roots.shape[0]
    if vals.shape[0] < m:
        raise InsufficientMoments(f"need at least {m} moments, got {vals.shape[0]}")
    if m > 1 and np.min(np.diff(np.sort(roots))) <= tol_sep:
        raise RepeatedRoots("roots are not separated enough to determine amplitudes")
    V = _vandermonde(roots, first, m)
    a = scipy.linalg.solve(V, vals[:m])
    if tol_res is not None:
        res = amplitude_residual(roots, a, moments)
        if res > tol_res:
            raise InconsistentMoments(f"amplitudes leave relative residual {res:.3e}")
    return a


def solve_prony(moments, m, eps=EPS_DEGENERATE, tol_im=TOL_IM, tol_sep=TOL_SEP, tol_res=TOL_RES,
                standardized=False):
    """Full solve at one sensor: coefficients, ascending roots, aligned amplitudes.

    With ``standardized`` (monomial moments only) the system is solved for the
    nodes of ``standardize(moments)`` and the roots are mapped back; the
    returned coefficients then belong to the standardized polynomial.
    """
    probe = moments.probe if isinstance(moments, MomentVector) else Probe.MONOMIAL
    st = standardize(moments) if standardized else None
    work = st.moments if st else moments
    system = build_hankel(work, m)
    c = solve_coefficients(system, eps)
    r, max_im = find_roots(c, None if st else probe, tol_im, return_imag=True)
    a = solve_amplitudes(r, work, tol_sep, tol_res)
    roots = check_range(st.roots_back(r), probe, TOL_RANGE) if st else r
    diagnostics = {
        "sigma_ratio": system.condition_ratio,
        "coefficient_residual": coefficient_residual(system, c),
        "max_imag_discarded": max_im,
        "amplitude_residual": amplitude_residual(r, a, work),
    }
    if st:
        diagnostics.update(shift=st.shift, scale=st.scale)
    return PronySolution(c, roots, a, diagnostics)
