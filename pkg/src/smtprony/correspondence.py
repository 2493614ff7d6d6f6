"""Which root at an auxiliary sensor belongs to which node.

With the amplitudes known, every permutation of the new roots is tried
against all 2m moment equations. Distinct amplitudes make the winner unique:
two valid permutations would put the amplitude vector in the kernel of a
matrix of power differences, and every kernel vector of such a matrix has two
equal entries. ``square_perm_diff_matrix`` and ``kernel_equal_pair_holds`` expose that
fact for testing, in exact rational arithmetic.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import AmbiguousAssignment, NoMatch
from .prony import _values

MAX_M = 8
TOL_MATCH = 1e-6
SEPARATION = 2.0


@dataclass(frozen=True)
class Assignment:
    """sigma[i] is the index of the root that belongs to node i."""

    sigma: tuple
    residual: float
    runner_up: float
    roots: np.ndarray
    sensor: int = None

    @property
    def distances(self):
        """Roots reordered into node order."""
        return self.roots[list(self.sigma)]

    def to_dict(self):
        return {
            "sensor": self.sensor,
            "sigma": list(self.sigma),
            "residual": self.residual,
            "runner_up": None if math.isinf(self.runner_up) else self.runner_up,
        }


def match_roots(amplitudes, roots, moments, sensor=None, tol_match=TOL_MATCH, separation=SEPARATION):
    """Exhaustive permutation search for the root order that fits all 2m moments.

    Raises NoMatch if even the best permutation leaves a residual above
    ``tol_match * ||tau||``, and AmbiguousAssignment if the runner-up is not at
    least ``separation`` times worse (the signature of colliding amplitudes).
    """
    amplitudes = np.asarray(amplitudes, dtype=float)
    roots = np.asarray(roots, dtype=float)
    m = amplitudes.shape[0]
    if roots.shape != (m,):
        raise ValueError("need one root per amplitude")
    if m > MAX_M:
        raise ValueError(f"permutation search is capped at m = {MAX_M}")
    tau, _, first = _values(moments)
    if tau.shape[0] < 2 * m:
        raise ValueError(f"need {2 * m} moments for matching, got {tau.shape[0]}")
    tau = tau[: 2 * m]
    perms = _kernels.permutation_table(m)
    res = _kernels.permutation_residuals(roots, amplitudes, tau, first, perms)
    order = np.argsort(res, kind="stable")
    best = float(res[order[0]])
    runner = float(res[order[1]]) if m > 1 else math.inf
    scale = np.linalg.norm(tau)
    if best > tol_match * scale:
        raise NoMatch(f"no permutation fits the moments (best residual {best:.3e})")
    # exact data can give best == 0; a runner-up that is also ~0 is a tie
    if m > 1 and runner <= max(separation * best, tol_match * scale * 1e-6):
        raise AmbiguousAssignment(
            f"root assignment is not unique (best {best:.3e}, runner-up {runner:.3e}); "
            "amplitudes may collide")
    sigma = tuple(int(i) for i in perms[order[0]])
    return Assignment(sigma, best, runner, roots, sensor)


# ---------------------------------------------------------------------------
# power-difference matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PermDiffMatrix:
    """M[p, j] = lambda_j^q - lambda_sigma(j)^q for the powers q listed in ``powers``."""

    matrix: np.ndarray
    lambdas: tuple
    sigma: tuple
    powers: tuple

    def exact(self):
        """The same matrix as nested lists of Fractions (inputs are converted exactly)."""
        lam = [Fraction(v) for v in self.lambdas]
        return [[lam[j] ** q - lam[self.sigma[j]] ** q for j in range(len(lam))] for q in self.powers]


def perm_diff_matrix(lambdas, sigma, powers):
    lam = tuple(float(v) for v in lambdas)
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(len(lam))):
        raise ValueError("sigma must be a permutation of range(len(lambdas))")
    arr = np.asarray(lam)
    pw = np.asarray(powers)
    M = arr[None, :] ** pw[:, None] - arr[list(sigma)][None, :] ** pw[:, None]
    return PermDiffMatrix(M, lam, sigma, tuple(int(p) for p in powers))


def square_perm_diff_matrix(lambdas, sigma):
    """Square n x n power-difference matrix, powers 1..n.

    Requires pairwise distinct lambdas and a non-identity permutation (0-based).
    """
    lam = [float(v) for v in lambdas]
    if len(set(lam)) != len(lam):
        raise ValueError("lambdas must be pairwise distinct")
    if tuple(sigma) == tuple(range(len(lam))):
        raise ValueError("sigma must not be the identity")
    return perm_diff_matrix(lam, sigma, range(1, len(lam) + 1))


def exact_null_space(rows):
    """Basis of the right kernel of a Fraction matrix by Gauss-Jordan elimination."""
    A = [list(r) for r in rows]
    n_rows = len(A)
    n_cols = len(A[0]) if A else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(n_rows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * n_cols
        v[fcol] = Fraction(1)
        for row, pc in enumerate(pivots):
            v[pc] = -A[row][fcol]
        basis.append(v)
    return basis


def _has_equal_pair(v):
    return len(set(v)) < len(v)


def kernel_equal_pair_holds(M, trials=16, seed=0):
    """True iff every kernel vector of M has two equal entries at different indices.

    The kernel is computed exactly; the property is checked on each basis vector
    and on ``trials`` random integer combinations of the basis.
    """
    rows = M.exact() if isinstance(M, PermDiffMatrix) else [[Fraction(v) for v in r] for r in M]
    basis = exact_null_space(rows)
    if not basis:
        return True
    if not all(_has_equal_pair(v) for v in basis):
        return False
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        coef = [int(c) for c in rng.integers(-1000, 1001, size=len(basis))]
        v = [sum(c * b[i] for c, b in zip(coef, basis)) for i in range(len(basis[0]))]
        if not _has_equal_pair(v):
            return False
    return True
