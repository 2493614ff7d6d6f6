"""Inner loops with a numba path and a pure-numpy fallback.

The numba versions are used when numba imports and ``SMTPRONY_NO_NUMBA`` is
unset (or "0"). Both paths compute the same quantities; tests run each
against the other.
"""

import math
import os
from itertools import permutations

import numpy as np

_DISABLED = os.environ.get("SMTPRONY_NO_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by SMTPRONY_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


BACKEND = "numba" if HAVE_NUMBA else "numpy"

_SERIES_RTOL = 1e-17
_MAX_SERIES_TERMS = 400


# ---------------------------------------------------------------------------
# normalized Bessel function j_nu(x) = x^-nu J_nu(x)
# ---------------------------------------------------------------------------

# The power series cancels heavily near the switch point (terms ~1e4 times the
# result), so it is summed in double-double arithmetic.

def _split(a):
    c = 134217729.0 * a
    hi = c - (c - a)
    return hi, a - hi


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _quick_two_sum(p, e)


def _dd_div_d(ah, al, d):
    q1 = ah / d
    p, e = _two_prod(q1, d)
    s, f = _two_sum(ah, -p)
    f -= e
    f += al
    q2 = (s + f) / d
    return _quick_two_sum(q1, q2)


def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e += al + bl
    return _quick_two_sum(s, e)


def _bessel_scalar(nu, x):
    """j_nu(x) for one x >= 0: power series below 12 + 2 nu, Hankel asymptotics above."""
    if x <= 12.0 + 2.0 * nu:
        qh, ql = _two_prod(x, x)
        qh *= 0.25
        ql *= 0.25
        th = 1.0 / (math.pow(2.0, nu) * math.gamma(nu + 1.0))
        tl = 0.0
        sh = th
        sl = 0.0
        for k in range(1, _MAX_SERIES_TERMS):
            th, tl = _dd_mul(th, tl, qh, ql)
            th, tl = _dd_div_d(th, tl, -(k * (k + nu)))
            sh, sl = _dd_add(sh, sl, th, tl)
            if abs(th) < _SERIES_RTOL * abs(sh):
                break
        return sh + sl
    # large argument: J_nu(x) ~ sqrt(2/(pi x)) (P cos w - Q sin w)
    mu = 4.0 * nu * nu
    w = x - 0.5 * nu * math.pi - 0.25 * math.pi
    p = 1.0
    q = 0.0
    a = 1.0
    prev = math.inf
    for k in range(1, 200):
        a *= (mu - (2.0 * k - 1.0) ** 2) / (k * 8.0 * x)
        if a == 0.0:
            break
        if abs(a) > prev:
            break
        prev = abs(a)
        # sign pattern (-1)^floor(k/2); odd k feed Q, even k feed P
        sign = -1.0 if (k // 2) % 2 == 1 else 1.0
        if k % 2 == 1:
            q += sign * a
        else:
            p += sign * a
        if abs(a) < 1e-17:
            break
    jv = math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(w) - q * math.sin(w))
    return jv * math.pow(x, -nu)


def _bessel_array_np(nu, x):
    """Vectorized numpy version of ``_bessel_scalar``; same branches, same arithmetic."""
    out = np.empty_like(x)
    small = x <= 12.0 + 2.0 * nu
    xs = x[small]
    if xs.size:
        split = 134217729.0
        c = split * xs
        xh = c - (c - xs)
        xl = xs - xh
        qh = xs * xs
        ql = ((xh * xh - qh) + 2.0 * xh * xl) + xl * xl
        qh, ql = 0.25 * qh, 0.25 * ql
        ch = split * qh
        qhh = ch - (ch - qh)
        qhl = qh - qhh
        th = np.full_like(xs, 1.0 / (2.0 ** nu * math.gamma(nu + 1.0)))
        tl = np.zeros_like(xs)
        sh = th.copy()
        sl = np.zeros_like(xs)
        active = np.ones(xs.shape, dtype=bool)
        for k in range(1, _MAX_SERIES_TERMS):
            if not active.any():
                break
            # t *= q  (double-double)
            p = th * qh
            c = split * th
            thh = c - (c - th)
            thl = th - thh
            e = ((thh * qhh - p) + thh * qhl + thl * qhh) + thl * qhl
            e = e + th * ql + tl * qh
            nh = p + e
            nl = e - (nh - p)
            # t /= -(k (k + nu))
            d = -(k * (k + nu))
            q1 = nh / d
            p = q1 * d
            c = split * q1
            q1h = c - (c - q1)
            q1l = q1 - q1h
            dh = split * d
            dhh = dh - (dh - d)
            dhl = d - dhh
            e = ((q1h * dhh - p) + q1h * dhl + q1l * dhh) + q1l * dhl
            s = nh - p
            bb = s - nh
            f = (nh - (s - bb)) + (-p - bb)
            f = f - e + nl
            q2 = (s + f) / d
            th_new = q1 + q2
            tl_new = q2 - (th_new - q1)
            th = np.where(active, th_new, 0.0)
            tl = np.where(active, tl_new, 0.0)
            # s += t
            s = sh + th
            bb = s - sh
            e = (sh - (s - bb)) + (th - bb)
            e = e + sl + tl
            sh_new = s + e
            sl = e - (sh_new - s)
            sh = sh_new
            active &= np.abs(th) >= _SERIES_RTOL * np.abs(sh)
        out[small] = sh + sl
    xb = x[~small]
    if xb.size:
        mu = 4.0 * nu * nu
        w = xb - 0.5 * nu * math.pi - 0.25 * math.pi
        p = np.ones_like(xb)
        q = np.zeros_like(xb)
        a = np.ones_like(xb)
        prev = np.full_like(xb, np.inf)
        live = np.ones(xb.shape, dtype=bool)
        for k in range(1, 200):
            a = a * (mu - (2.0 * k - 1.0) ** 2) / (k * 8.0 * xb)
            live &= (a != 0.0) & (np.abs(a) <= prev)
            if not live.any():
                break
            prev = np.where(live, np.abs(a), prev)
            sign = -1.0 if (k // 2) % 2 == 1 else 1.0
            if k % 2 == 1:
                q = np.where(live, q + sign * a, q)
            else:
                p = np.where(live, p + sign * a, p)
            live &= np.abs(a) >= 1e-17
        jv = np.sqrt(2.0 / (math.pi * xb)) * (p * np.cos(w) - q * np.sin(w))
        out[~small] = jv * xb ** (-nu)
    return out


if HAVE_NUMBA:
    _split = njit(cache=True)(_split)
    _two_sum = njit(cache=True)(_two_sum)
    _two_prod = njit(cache=True)(_two_prod)
    _quick_two_sum = njit(cache=True)(_quick_two_sum)
    _dd_mul = njit(cache=True)(_dd_mul)
    _dd_div_d = njit(cache=True)(_dd_div_d)
    _dd_add = njit(cache=True)(_dd_add)
    _bessel_scalar_jit = njit(cache=True)(_bessel_scalar)

    @njit(cache=True)
    def _bessel_array_jit(nu, x):
        out = np.empty(x.shape[0])
        for i in range(x.shape[0]):
            out[i] = _bessel_scalar_jit(nu, x[i])
        return out


def bessel_normalized(nu, x, backend=None):
    """Vectorized j_nu over a float array of nonnegative arguments."""
    arr = np.ascontiguousarray(np.asarray(x, dtype=float).ravel())
    use = backend or BACKEND
    if use == "numba" and HAVE_NUMBA:
        out = _bessel_array_jit(float(nu), arr)
    else:
        out = _bessel_array_np(float(nu), arr)
    return out.reshape(np.shape(x))


# ---------------------------------------------------------------------------
# permutation residual scan
# ---------------------------------------------------------------------------

def permutation_table(m):
    """All permutations of range(m) in lexicographic order, shape (m!, m)."""
    return np.array(list(permutations(range(m))), dtype=np.int64).reshape(-1, m)


def _perm_residuals_np(roots, amps, tau, first_power, perms):
    powers = first_power + np.arange(tau.shape[0])
    # xi[perms] : (P, m); node i gets root perms[:, i]
    xi = roots[perms]
    pred = np.einsum("pim,m->pi", xi[:, None, :] ** powers[None, :, None], amps)
    return np.sqrt(np.sum((pred - tau[None, :]) ** 2, axis=1))


if HAVE_NUMBA:

    @njit(cache=True)
    def _perm_residuals_jit(roots, amps, tau, first_power, perms):
        n_perm, m = perms.shape
        rows = tau.shape[0]
        out = np.empty(n_perm)
        for p in range(n_perm):
            acc = 0.0
            for r in range(rows):
                power = first_power + r
                s = 0.0
                for i in range(m):
                    s += amps[i] * roots[perms[p, i]] ** power
                d = s - tau[r]
                acc += d * d
            out[p] = math.sqrt(acc)
        return out


def permutation_residuals(roots, amps, tau, first_power, perms, backend=None):
    """Residual ||sum_i a_i xi_{perm(i)}^p - tau_p|| for each permutation row."""
    roots = np.ascontiguousarray(roots, dtype=float)
    amps = np.ascontiguousarray(amps, dtype=float)
    tau = np.ascontiguousarray(tau, dtype=float)
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    use = backend or BACKEND
    if use == "numba" and HAVE_NUMBA:
        return _perm_residuals_jit(roots, amps, tau, int(first_power), perms)
    return _perm_residuals_np(roots, amps, tau, int(first_power), perms)


# ---------------------------------------------------------------------------
# affine independence over all (n+1)-subsets
# ---------------------------------------------------------------------------

def _subset_ratios_np(points, subsets):
    pts = points[subsets]  # (S, n+1, n)
    diffs = pts[:, 1:, :] - pts[:, :1, :]
    sv = np.linalg.svd(diffs, compute_uv=False)
    smax = sv[:, 0]
    smin = sv[:, -1]
    out = np.zeros(subsets.shape[0])
    nz = smax > 0
    out[nz] = smin[nz] / smax[nz]
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def _subset_ratios_jit(points, subsets):
        n_sub, k = subsets.shape
        n = points.shape[1]
        out = np.empty(n_sub)
        diffs = np.empty((k - 1, n))
        for s in range(n_sub):
            base = subsets[s, 0]
            for r in range(1, k):
                for c in range(n):
                    diffs[r - 1, c] = points[subsets[s, r], c] - points[base, c]
            sv = np.linalg.svd(diffs)[1]
            if sv[0] > 0.0:
                out[s] = sv[-1] / sv[0]
            else:
                out[s] = 0.0
        return out


def subset_singular_ratios(points, subsets, backend=None):
    """sigma_min / sigma_max of the difference matrix for every index subset."""
    points = np.ascontiguousarray(points, dtype=float)
    subsets = np.ascontiguousarray(subsets, dtype=np.int64)
    if subsets.shape[0] == 0:
        return np.zeros(0)
    # batched LAPACK beats per-subset jitted SVD calls, so numpy is the default here
    use = backend or "numpy"
    if use == "numba" and HAVE_NUMBA:
        return _subset_ratios_jit(points, subsets)
    return _subset_ratios_np(points, subsets)


def bessel_scalar(nu, x):
    """Scalar j_nu(x); the numba path when available."""
    if HAVE_NUMBA:
        return _bessel_scalar_jit(float(nu), float(x))
    return _bessel_scalar(float(nu), float(x))
