"""Geometric inversion from distances.

A point from its distances to n + 1 affinely independent anchors, a
hyperplane from its unsigned distances to 2n + 1 anchors in general
position, and the equidistance loci that make a sensor degenerate.
"""

import itertools

import numpy as np

from .errors import (AffinelyDependentAnchors, CoincidentPoints, IdenticalHyperplanes,
                     InconsistentDistances, MultipleCandidates, NoConsistentHyperplane)
from .model import EPS_GP, canonical_hyperplane

TOL_UNIT = 1e-6
TOL_GEO = 1e-6
_DEDUP = 1e-6


def _geo_tol(distances, tol):
    return tol * (1.0 + np.linalg.norm(distances))


def _affinely_independent(anchors, eps=EPS_GP):
    diffs = anchors[1:] - anchors[0]
    sv = np.linalg.svd(diffs, compute_uv=False)
    return sv[0] > 0 and sv[-1] > eps * sv[0]


def trilaterate(anchors, distances, tol=TOL_GEO):
    """The point at the given distances from n + 1 affinely independent anchors.

    Subtracting the first squared-distance equation from the others leaves the
    linear system 2 (y_1 - y_l) . x = |y_1|^2 - |y_l|^2 - (d_1^2 - d_l^2). All
    n + 1 distances are re-checked against ``tol * (1 + ||d||)``; pass
    ``tol=None`` to skip the check.
    """
    Y = np.asarray(anchors, dtype=float)
    d = np.asarray(distances, dtype=float)
    n = Y.shape[1]
    if Y.shape != (n + 1, n) or d.shape != (n + 1,):
        raise ValueError(f"need {n + 1} anchors in R^{n} and one distance per anchor")
    if np.any(d < 0):
        raise ValueError("distances must be nonnegative")
    if not _affinely_independent(Y):
        raise AffinelyDependentAnchors("anchors lie in a common hyperplane")
    sq = np.sum(Y * Y, axis=1)
    A = 2.0 * (Y[0] - Y[1:])
    b = (sq[0] - sq[1:]) - (d[0] ** 2 - d[1:] ** 2)
    x = np.linalg.solve(A, b)
    if tol is not None:
        miss = np.max(np.abs(np.linalg.norm(Y - x, axis=1) - d))
        if miss > _geo_tol(d, tol):
            raise InconsistentDistances(f"no point matches all distances (max miss {miss:.3e})")
    return x


def bisector_hyperplane(xi, xj):
    """Canonical (theta, rho) of the locus |y - xi| = |y - xj|."""
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    diff = xi - xj
    norm = np.linalg.norm(diff)
    if norm == 0:
        raise CoincidentPoints("bisector of a point with itself is undefined")
    theta = diff / norm
    return canonical_hyperplane(theta, float(0.5 * (xi + xj) @ theta))


def unsigned_distance(y, theta, rho):
    theta = np.asarray(theta, dtype=float)
    if abs(np.linalg.norm(theta) - 1.0) > 1e-9:
        raise ValueError("normal must be a unit vector")
    return float(abs(rho - np.asarray(y, dtype=float) @ theta))


def _same_hyperplane(h1, h2, tol=_DEDUP):
    (t1, r1), (t2, r2) = h1, h2
    return np.all(np.abs(t1 - t2) <= tol) and abs(r1 - r2) <= tol


def equidistance_hyperplanes(theta_i, rho_i, theta_j, rho_j, tol=1e-12):
    """Loci where |rho_i - <y, theta_i>| = |rho_j - <y, theta_j>|.

    Two hyperplanes <y, theta_i -+ theta_j> = rho_i -+ rho_j in general; for
    parallel inputs one of them has a zero normal and is dropped.
    """
    ti = np.asarray(theta_i, dtype=float)
    tj = np.asarray(theta_j, dtype=float)
    hi = canonical_hyperplane(ti, rho_i)
    hj = canonical_hyperplane(tj, rho_j)
    if _same_hyperplane(hi, hj, 1e-12):
        raise IdenticalHyperplanes("the two hyperplanes coincide")
    out = []
    for normal, offset in ((ti - tj, rho_i - rho_j), (ti + tj, rho_i + rho_j)):
        norm = np.linalg.norm(normal)
        if norm <= tol:
            continue
        out.append(canonical_hyperplane(normal / norm, offset / norm))
    return out


def hyperplane_from_unsigned_distances(anchors, distances, tol_unit=TOL_UNIT, tol=TOL_GEO):
    """The unique hyperplane at the given unsigned distances from the anchors.

    Every sign pattern on the first n + 1 anchors gives a linear system for
    (theta, rho); solutions with unit normal are kept and checked against the
    remaining anchors. Raises NoConsistentHyperplane if nothing survives and
    MultipleCandidates (carrying all survivors) if more than one does.
    """
    Y = np.asarray(anchors, dtype=float)
    d = np.asarray(distances, dtype=float)
    N, n = Y.shape
    if N < n + 1 or d.shape != (N,):
        raise ValueError(f"need at least {n + 1} anchors and one distance per anchor")
    head, tail = Y[: n + 1], Y[n + 1:]
    if not _affinely_independent(head):
        raise AffinelyDependentAnchors("the first n + 1 anchors lie in a common hyperplane")
    A = np.hstack([head, -np.ones((n + 1, 1))])
    lu = np.linalg.inv(A)
    geo = _geo_tol(d, tol)
    found = []
    # eps and -eps give mirrored (theta, rho); fixing the first sign halves the work
    for tail_signs in itertools.product((1.0, -1.0), repeat=n):
        signs = np.array((1.0,) + tail_signs)
        sol = lu @ (signs * d[: n + 1])
        theta, rho = sol[:n], sol[n]
        norm = np.linalg.norm(theta)
        if abs(norm - 1.0) > tol_unit:
            continue
        theta, rho = theta / norm, rho / norm
        if tail.size and np.max(np.abs(np.abs(tail @ theta - rho) - d[n + 1:])) > geo:
            continue
        if np.max(np.abs(np.abs(head @ theta - rho) - d[: n + 1])) > geo:
            continue
        cand = canonical_hyperplane(theta, rho)
        if not any(_same_hyperplane(cand, f) for f in found):
            found.append(cand)
    if not found:
        raise NoConsistentHyperplane("no hyperplane matches the distances")
    if len(found) > 1:
        raise MultipleCandidates(f"{len(found)} hyperplanes match the distances", found)
    return found[0]
