"""Large-entry classification, good diagonals and strong-line detection.

An entry of the coefficient matrix is *large* when its magnitude is close to
one of the targets (by default {2c, 2(1 - c)}). A generalised diagonal of a
square block A[X, Y] is *good* when it holds exactly one large entry, and
the block is *q-good* when a random diagonal is good with probability at
least 1 - q. A row (column) is *p-strong* when at most a p fraction of its
entries inside the block are not large.

Lines are ``(kind, index)`` pairs with kind ``"row"`` or ``"column"`` and a
zero-based index into the full matrix.
"""
import itertools
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from snf import kernels
from snf.errors import PipelineError, ValidationError
from snf.family import COLUMN, ROW

TOL_FLOOR = 1e-9
EXACT_MAX_M = 14
"""Largest block size whose good-diagonal fraction is computed exactly."""

DIRECT = "direct"
RECURSIVE = "recursive"

Q_LIMIT = 1.0 / 50.0


@dataclass(frozen=True)
class LargenessClassifier:
    epsilon: float
    c: float
    threshold: float
    targets: tuple

    def __post_init__(self):
        if not self.threshold >= TOL_FLOOR:
            raise ValidationError("classifier threshold must be at least 1e-9")

    @classmethod
    def from_matrix(cls, M, threshold=None, finite_n=False):
        """Classifier for ``M``.

        The default threshold is 50 eps^(1/7) with targets {2c, 2(1 - c)}.
        With ``finite_n=True`` the targets are the exact magnitudes that a
        dictatorship's line entries take at this n (tau = 1 and tau = 0),
        and the default threshold is capped at eta/2 so the off-line
        entries of a dictatorship are never classified as large.
        """
        eps = max(float(M.epsilon), 0.0)
        c, n = M.c, M.n
        base = 50.0 * eps ** (1.0 / 7.0)
        if finite_n:
            t1 = (2 * n - 3 - 2 * (n - 2) * c) / n
            t0 = (-1 - 2 * (n - 2) * c) / n
            targets = tuple(sorted({abs(t0), abs(t1)}))
            if threshold is None:
                threshold = min(base, M.eta / 2.0)
        else:
            targets = tuple(sorted({2 * c, 2 * (1 - c)}))
            if threshold is None:
                threshold = base
        return cls(eps, c, max(float(threshold), TOL_FLOOR), targets)


def classify(M, cls):
    """Boolean matrix L with L[i, j] iff |a[i, j]| is within threshold of a target."""
    A = np.abs(np.asarray(M.a if hasattr(M, "a") else M, dtype=np.float64))
    dist = np.min(np.stack([np.abs(A - t) for t in cls.targets]), axis=0)
    return dist <= cls.threshold


@dataclass(frozen=True)
class DiagonalFraction:
    value: float
    stderr: float
    exact: bool


def _block(L, X, Y):
    L = np.asarray(L, dtype=bool)
    if X is None:
        return L
    return L[np.ix_(np.asarray(X, dtype=np.intp), np.asarray(Y, dtype=np.intp))]


def good_diagonal_fraction(L, X=None, Y=None, rng=None, samples=20000, exact=None):
    """Fraction of generalised diagonals of L[X, Y] with exactly one large entry.

    Exact (inclusion-exclusion over column subsets) for m <= 14 unless
    ``exact=False``; otherwise a Monte Carlo estimate over ``samples``
    uniform diagonals drawn from ``rng``.
    """
    B = _block(L, X, Y)
    m = B.shape[0]
    if B.ndim != 2 or B.shape[1] != m or m < 1:
        raise ValidationError("good_diagonal_fraction needs a non-empty square block")
    if exact is None:
        exact = m <= EXACT_MAX_M
    if exact:
        if m > 20:
            raise ValidationError("exact diagonal counting supports m <= 20")
        _, one = kernels.diagonal_large_counts(B)
        return DiagonalFraction(one / factorial(m), 0.0, True)
    if rng is None:
        raise ValidationError("Monte Carlo diagonal counting needs an rng")
    hits = 0
    done = 0
    chunk = 1 << 14
    rows = np.arange(m)
    while done < samples:
        k = min(chunk, samples - done)
        perms = np.argsort(rng.random((k, m)), axis=1)
        hits += int((B[rows, perms].sum(axis=1) == 1).sum())
        done += k
    frac = hits / samples
    return DiagonalFraction(frac, float(np.sqrt(frac * (1 - frac) / samples)), False)


def good_diagonal_fraction_permanent(L):
    """The same exact fraction as a sum of permanents.

    sum over large (i, j) of perm(S without row i and column j) / m!, where S
    is the 0/1 indicator of small entries.
    """
    B = np.asarray(L, dtype=bool)
    m = B.shape[0]
    S = (~B).astype(np.float64)
    total = 0.0
    for i, j in zip(*np.nonzero(B)):
        minor = np.delete(np.delete(S, i, axis=0), j, axis=1)
        total += kernels.permanent(minor)
    return total / factorial(m)


def line_cells(L, line, X=None, Y=None):
    """Large cells (i, j) of ``line`` inside the block, in global indices."""
    L = np.asarray(L, dtype=bool)
    n0, n1 = L.shape
    X = np.arange(n0) if X is None else np.asarray(X)
    Y = np.arange(n1) if Y is None else np.asarray(Y)
    kind, idx = line
    if kind == ROW:
        return [(idx, int(j)) for j in Y if L[idx, j]]
    return [(int(i), idx) for i in X if L[i, idx]]


def line_strength(L, line, X=None, Y=None):
    """Fraction of the line's entries inside the block that are not large."""
    L = np.asarray(L, dtype=bool)
    X = np.arange(L.shape[0]) if X is None else np.asarray(X)
    Y = np.arange(L.shape[1]) if Y is None else np.asarray(Y)
    kind, idx = line
    vals = L[idx, Y] if kind == ROW else L[X, idx]
    return float(1.0 - vals.mean())


def conflict_count(L, line1, line2, X=None, Y=None):
    """Number of non-conflicting pairs of large entries, one from each line.

    Two cells conflict when they share a row or a column. A random diagonal
    through both cells of a non-conflicting pair has two large entries, so
    count / (m (m - 1)) is a lower bound on the fraction of bad diagonals.
    """
    if tuple(line1) == tuple(line2):
        raise ValidationError("conflict_count needs two distinct lines")
    c1 = line_cells(L, line1, X, Y)
    c2 = line_cells(L, line2, X, Y)
    return sum(1 for (i1, j1) in c1 for (i2, j2) in c2 if i1 != i2 and j1 != j2)


@dataclass(frozen=True)
class StrongLineReport:
    kind: str
    index: int
    strength_p: float
    q_good: float
    method: str
    degraded: bool = False
    trace: tuple = field(default=(), compare=False)

    @property
    def line(self):
        return (self.kind, self.index)

    def to_dict(self):
        return {
            "kind": self.kind,
            "index": self.index,
            "strength_p": self.strength_p,
            "q_good": self.q_good,
            "method": self.method,
            "degraded": self.degraded,
            "trace": [dict(t) for t in self.trace],
        }


def _best_line(B):
    """(kind, local index, non-large fraction) with the fewest non-large entries.

    Ties go to rows before columns, then to the lowest index.
    """
    rows = 1.0 - B.mean(axis=1)
    cols = 1.0 - B.mean(axis=0)
    r = int(np.argmin(rows))
    k = int(np.argmin(cols))
    if rows[r] <= cols[k]:
        return ROW, r, float(rows[r])
    return COLUMN, k, float(cols[k])


def measure_q(L, rng=None, samples=20000):
    frac = good_diagonal_fraction(L, rng=rng, samples=samples)
    return 1.0 - frac.value, frac


def find_strong_line_direct(L, p_max, q_good=None, rng=None):
    """The strongest line if its non-large fraction is at most ``p_max``."""
    B = np.asarray(L, dtype=bool)
    kind, idx, p = _best_line(B)
    if p > p_max:
        return None
    if q_good is None:
        q_good = measure_q(B, rng=rng)[0] if (B.shape[0] <= EXACT_MAX_M or rng is not None) else float("nan")
    return StrongLineReport(kind, idx, p, float(q_good), DIRECT)


class _Search:
    """State shared across one recursive search."""

    def __init__(self, L, q, rng, samples, splits):
        self.L = np.asarray(L, dtype=bool)
        self.q = q
        self.rng = rng
        self.samples = samples
        self.splits = splits
        self.trace = []

    def q_of(self, L, X, Y):
        if len(X) == 0:
            return 1.0
        frac = good_diagonal_fraction(L, X, Y, rng=self.rng, samples=self.samples)
        return 1.0 - frac.value

    def is_good(self, L, X, Y):
        return self.q_of(L, X, Y) <= self.q

    def y_candidates(self, L, Xp, Y):
        """Y' of size |X'|: the greedy choice first, then an exhaustive or
        sampled sweep."""
        k = len(Xp)
        counts = L[np.ix_(Xp, Y)].sum(axis=0)
        order = sorted(range(len(Y)), key=lambda t: (-int(counts[t]), t))
        greedy = tuple(sorted(order[:k]))
        yield greedy
        if len(Y) <= 12:
            for combo in itertools.combinations(range(len(Y)), k):
                if combo != greedy:
                    yield combo
        else:
            for _ in range(min(1000, comb(len(Y), k))):
                yield tuple(sorted(self.rng.choice(len(Y), size=k, replace=False).tolist()))

    def halve(self, L, X, Y, Xp, depth, flip):
        Xr = np.setdiff1d(X, Xp)
        for combo in self.y_candidates(L, Xp, Y):
            Yp = Y[list(combo)]
            if self.is_good(L, Xp, Yp):
                return self.solve(L, Xp, Yp, depth + 1, flip)
            Yr = np.setdiff1d(Y, Yp)
            if self.is_good(L, Xr, Yr):
                return self.solve(L, Xr, Yr, depth + 1, flip)
        return None

    def solve(self, L, X, Y, depth=0, flip=False):
        """A strong line of the q-good block L[X, Y] in global coordinates."""
        m = len(X)
        if m < 2 or m < 1.0 / (4.0 * self.q):
            kind, idx, p = _best_line(L[np.ix_(X, Y)])
            line = (kind, int(X[idx] if kind == ROW else Y[idx]))
            self.trace.append({"depth": depth, "m": m, "step": "base", "line": _flip(line, flip)})
            return _flip(line, flip)
        half = m // 2
        plans = [
            (L, X, Y, X[:half], flip),
            (L.T, Y, X, Y[:half], not flip),
        ]
        if self.splits > 2:
            plans.append((L, X, Y, np.sort(self.rng.choice(X, size=half, replace=False)), flip))
        found = []
        for Ls, Xs, Ys, Xp, fl in plans[: self.splits]:
            line = self.halve(Ls, Xs, Ys, Xp, depth, fl)
            if line is not None:
                found.append(line)
        self.trace.append({"depth": depth, "m": m, "step": "split", "candidates": found})
        if not found:
            return None
        # lines are reported in orientation ``flip``; bring them back to the
        # orientation of this block before voting
        local = [_flip(l, flip) for l in found]
        return _flip(self.align(L, X, Y, local), flip)

    def align(self, L, X, Y, lines):
        distinct = sorted(set(lines), key=lambda l: (-lines.count(l), l[0] != ROW, l[1]))
        if len(distinct) > 1:
            m = len(X)
            q_here = self.q_of(L, X, Y)
            for a, b in itertools.combinations(distinct, 2):
                bound = conflict_count(L, a, b, X, Y) / (m * (m - 1))
                if bound > q_here + 1e-12:
                    raise PipelineError(
                        "misaligned strong lines",
                        {"line1": list(a), "line2": list(b), "forced_q": bound, "measured_q": q_here},
                    )
        return distinct[0]


def _flip(line, flip):
    if not flip:
        return line
    kind, idx = line
    return (COLUMN if kind == ROW else ROW, idx)


def find_strong_line_recursive(L, q, rng, samples=20000, splits=3):
    """Strong line of a q-good matrix by recursive halving.

    Blocks with m < 1/(4q) are solved by scanning for the strongest line.
    Larger blocks are split k = ``splits`` ways (first half of rows, first
    half of columns, random half of rows); for each split a Y' making one
    half q-good is searched for and the search recurses there. The
    candidate lines are aligned by vote, with a conflict-count check that
    raises :class:`~snf.errors.PipelineError` if two candidates cannot both
    be strong at the measured q. Finally the chosen line must satisfy the
    bootstrap budget: at most 3 rho m large entries off the line, with
    rho = 2q/(1 - p).

    If the whole matrix is not q-good, or the search fails, the direct scan
    result is returned with ``degraded=True``.
    """
    if not 0 < q < Q_LIMIT:
        raise ValidationError("q must lie in (0, 1/50)")
    B = np.asarray(L, dtype=bool)
    m = B.shape[0]
    if B.ndim != 2 or B.shape[1] != m:
        raise ValidationError("L must be square")
    search = _Search(B, q, rng, samples, splits)
    idx = np.arange(m)
    q_full = search.q_of(B, idx, idx)

    def degraded(reason):
        kind, i, p = _best_line(B)
        trace = tuple(search.trace) + ({"step": "degraded", "reason": reason},)
        return StrongLineReport(kind, i, p, q_full, RECURSIVE, True, trace)

    if q_full > q:
        return degraded(f"measured q {q_full:.6g} exceeds {q:.6g}")
    line = search.solve(B, idx, idx)
    if line is None:
        return degraded("no q-good half found")
    p = line_strength(B, line)
    rho = 2 * q / (1 - p) if p < 1 else float("inf")
    outside = int(B.sum()) - len(line_cells(B, line))
    budget = 3 * rho * m
    search.trace.append({"step": "bootstrap", "outside_large": outside, "budget": budget, "p": p})
    if outside > budget or p > 13 * q:
        return degraded("bootstrap check failed")
    return StrongLineReport(line[0], line[1], p, q_full, RECURSIVE, False, tuple(search.trace))


def planted_instance(m, rng, p_max=0.1, q_max=Q_LIMIT, max_extra=1, samples=20000,
                     max_tries=10000):
    """Random matrix with a planted strong line whose measured q is below ``q_max``.

    Returns ``(L, line, p, q)``. The plant has a non-large fraction drawn
    uniformly from {0, 1/m, ...} up to ``p_max`` and between 0 and
    ``max_extra`` large entries are scattered off the line. Draws are
    rejected until the measured q is below ``q_max``.

    Every hole in the plant and every off-line large entry makes a 1/m
    share of diagonals bad, so draws whose count already forces q >= q_max
    are rejected before measuring.
    """
    for _ in range(max_tries):
        L = np.zeros((m, m), dtype=bool)
        kind = ROW if rng.random() < 0.5 else COLUMN
        idx = int(rng.integers(m))
        holes = int(rng.integers(int(p_max * m) + 1))
        extra = int(rng.integers(max_extra + 1))
        vec = np.ones(m, dtype=bool)
        vec[rng.choice(m, size=holes, replace=False)] = False
        off = [k for k in range(m * m) if (k // m if kind == ROW else k % m) != idx]
        for k in rng.choice(off, size=extra, replace=False):
            L[k // m, k % m] = True
        if kind == ROW:
            L[idx, :] = vec
        else:
            L[:, idx] = vec
        if (holes + extra) / m >= q_max:
            continue
        q = 1.0 - good_diagonal_fraction(L, rng=rng, samples=samples).value
        if q < q_max:
            return L, (kind, idx), holes / m, q
    raise PipelineError("could not draw a planted instance", {"m": m, "q_max": q_max})
