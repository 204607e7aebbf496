"""Projection onto U_1 = span{T[i, j]} through the coefficient matrix.

For a family F of measure c and f = 2 chi_F - 1 the canonical coefficients

    a[i, j] = (n - 1) <f, T[i, j]> - (n - 2)/n (2c - 1)

satisfy f_1 = sum a[i, j] T[i, j], so f_1(pi) is the sum of the generalised
diagonal {a[i, pi(i)]}. Every row and column of ``a`` sums to 2c - 1 and
sum a^2 = (n - 1)(1 - eps) - (n - 2)(2c - 1)^2 with eps = E[(f - f_1)^2].
"""
import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy import linalg

from snf import family as fs
from snf import perm as P
from snf.errors import CapacityError

EXACT = "exact"
MONTE_CARLO = "monte_carlo"

DEGREE_ABOVE_2 = ">2"
"""Returned by :func:`degree` when f is not within tolerance of U_2."""


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    n: int
    a: np.ndarray
    c: float
    epsilon: float
    epsilon_kind: str = EXACT
    epsilon_stderr: float = 0.0

    @property
    def eta(self):
        return min(self.c, 1.0 - self.c)

    def transpose(self):
        return CoefficientMatrix(self.n, self.a.T.copy(), self.c, self.epsilon,
                                 self.epsilon_kind, self.epsilon_stderr)


@dataclass(frozen=True, eq=False)
class TauMatrix:
    """tau[i, j] = |F intersect T[i, j]| / (n - 1)!, the density of F in each coset."""

    n: int
    tau: np.ndarray
    c: float

    @property
    def gamma(self):
        return gamma(self.c)


def gamma(c):
    """The medium value 2c (c < 1/2) or 2c - 1 (c > 1/2); None at c = 1/2."""
    if c < 0.5:
        return 2.0 * c
    if c > 0.5:
        return 2.0 * c - 1.0
    return None


def _tau_from_counts(counts, n):
    fact = factorial(n - 1)
    if counts.dtype == object:
        return np.array([[int(x) / fact for x in row] for row in counts], dtype=np.float64)
    return counts.astype(np.float64) / float(fact)


def tau_matrix(F):
    counts = fs.coset_count_matrix(F)
    return TauMatrix(F.n, _tau_from_counts(counts, F.n), F.c)


def tau_from_a(M):
    """tau recovered from the coefficients: (2(n-2)c + 1)/(2(n-1)) + n a/(2(n-1))."""
    n, c = M.n, M.c
    tau = (2 * (n - 2) * c + 1) / (2 * (n - 1)) + n / (2 * (n - 1)) * M.a
    return TauMatrix(n, tau, c)


def coefficients_from_tau(tau, c):
    """a[i, j] from coset densities; <f, T[i, j]> = (2 tau - 1)/n."""
    n = tau.shape[0]
    inner = (2.0 * tau - 1.0) / n
    return (n - 1) * inner - (n - 2) / n * (2 * c - 1)


def coefficient_matrix(F, samples=10**6, rng=None):
    """Coefficient matrix of ``F`` with its distance eps to U_1.

    eps is exact (enumeration of every diagonal) whenever F can be
    materialised; otherwise it is a Monte Carlo estimate over ``samples``
    uniform permutations drawn from ``rng``.
    """
    n = F.n
    if n < 2:
        raise CapacityError("the coefficient matrix needs n >= 2")
    tau = tau_matrix(F)
    a = coefficients_from_tau(tau.tau, F.c)
    a.setflags(write=False)
    M = CoefficientMatrix(n, a, F.c, float("nan"))
    eps, kind, se = distance_to_u1(F, M=M, samples=samples, rng=rng)
    return CoefficientMatrix(n, a, F.c, eps, kind, se)


def evaluate_f1(M, p):
    """f_1(p) = sum_i a[i, p(i)]."""
    imgs = p.images if isinstance(p, P.Permutation) else tuple(p)
    return float(sum(M.a[i, j] for i, j in enumerate(imgs)))


def evaluate_f1_array(M, perms):
    perms = np.asarray(perms, dtype=np.int64)
    return M.a[np.arange(M.n), perms].sum(axis=1)


def f1_function(M):
    """f_1 as a dense :class:`RealFunction` (n <= 9)."""
    return fs.RealFunction(M.n, evaluate_f1_array(M, P.all_perms(M.n)))


def distance_to_u1(F, M=None, samples=10**6, rng=None):
    """Return ``(eps, kind, stderr)`` with eps = E[(f - f_1)^2]."""
    if M is None:
        tau = tau_matrix(F)
        M = CoefficientMatrix(F.n, coefficients_from_tau(tau.tau, F.c), F.c, float("nan"))
    if F.is_explicit or F.n <= P.MAX_DENSE_N:
        E = fs.materialize(F)
        f = np.where(E.member, 1.0, -1.0)
        f1 = evaluate_f1_array(M, P.all_perms(F.n))
        return float(np.mean((f - f1) ** 2)), EXACT, 0.0
    if rng is None:
        rng = np.random.default_rng(0)
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk = 1 << 16
    while done < samples:
        k = min(chunk, samples - done)
        perms = P.random_perms(F.n, k, rng)
        f = np.where(F.contains_array(perms), 1.0, -1.0)
        d = (f - evaluate_f1_array(M, perms)) ** 2
        total += float(d.sum())
        total_sq += float((d * d).sum())
        done += k
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, MONTE_CARLO, float(np.sqrt(var / samples))


@dataclass(frozen=True)
class IdentityReport:
    row_sum: float
    column_sum: float
    l2: float
    max_abs_entry: float
    abs_bound_violations: int

    def max_violation(self):
        return max(self.row_sum, self.column_sum, self.l2)


def verify_identities(M):
    """Largest absolute violation of each coefficient identity.

    ``l2`` compares sum a^2 against (n-1)(1-eps) - (n-2)(2c-1)^2 and needs an
    exact eps. Entries with |a| > 1 + 1e-9 are counted, not asserted.
    """
    if M.epsilon_kind != EXACT:
        raise ValueError("identity verification needs an exact epsilon")
    n, c, a = M.n, M.c, M.a
    target = 2 * c - 1
    row = float(np.max(np.abs(a.sum(axis=1) - target)))
    col = float(np.max(np.abs(a.sum(axis=0) - target)))
    l2 = abs(float((a * a).sum()) - ((n - 1) * (1 - M.epsilon) - (n - 2) * target**2))
    absmax = float(np.max(np.abs(a)))
    return IdentityReport(row, col, l2, absmax, int((np.abs(a) > 1 + 1e-9).sum()))


def _tuple_indicators(n, t):
    """Design matrix with one column per t-coset T_IJ over ordered tuples."""
    perms = P.all_perms(n)
    if t == 0:
        return np.ones((len(perms), 1))
    tuples = list(itertools.permutations(range(n), t))
    cols = []
    for I in tuples:
        img = perms[:, list(I)]
        for J in tuples:
            cols.append(np.all(img == np.asarray(J), axis=1))
    return np.stack(cols, axis=1).astype(np.float64)


_GRAM_CACHE = {}

RIDGE = 1e-12


def project_ut(f, t):
    """Orthogonal projection of ``f`` onto U_t = span{T_IJ : |I| = |J| = t}.

    Solves the ridge-stabilised normal equations on the Gram matrix of the
    (linearly dependent) coset indicators.
    """
    n = f.n
    if t < 0 or t > 2:
        raise CapacityError("projection is implemented for t <= 2")
    if t == 2 and n > 7:
        raise CapacityError("U_2 projection needs n <= 7")
    if n > P.MAX_DENSE_N:
        raise CapacityError(f"projection needs n <= {P.MAX_DENSE_N}")
    key = (n, t)
    if key not in _GRAM_CACHE:
        B = _tuple_indicators(n, t)
        G = B.T @ B / len(B)
        G[np.diag_indices_from(G)] += RIDGE
        _GRAM_CACHE[key] = (B, linalg.lu_factor(G))
    B, lu = _GRAM_CACHE[key]
    coef = linalg.lu_solve(lu, B.T @ f.values / len(B))
    return fs.RealFunction(n, B @ coef)


def degree(f, tol=None):
    """Smallest t in {0, 1, 2} with ||f - proj_t f|| <= tol, else ``DEGREE_ABOVE_2``.

    ``tol`` defaults to 1e-6 ||f||.
    """
    if tol is None:
        tol = 1e-6 * f.norm()
    for t in (0, 1, 2):
        if t == 2 and f.n > 7:
            raise CapacityError("degree needs n <= 7")
        if (f - project_ut(f, t)).norm() <= tol:
            return t
    return DEGREE_ABOVE_2
