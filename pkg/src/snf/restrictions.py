"""Random restrictions, their moments, and goodness diagnostics.

A restriction is a pair (X, Y) of equal-size subsets of [n]; T_{X,Y} is the
set of permutations with pi(X) = Y. Under the distribution R each i joins X
independently with probability 1/2 and Y is a uniform subset of size |X|.
On T_{X,Y} the projection f_1 splits as g1 + g2 where g1 sums the diagonal
entries with rows in X and g2 the remaining ones.
"""
from dataclasses import asdict, dataclass
from math import comb, factorial

import numpy as np

from snf import perm as P
from snf import projection as pj
from snf.errors import ValidationError

TOL_FLOOR = 1e-9
"""Lower bound for every eps-derived tolerance, so eps = 0 stays well defined."""


def stream(seed, index=0):
    """Independent counter-based generator for worker ``index`` under ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


def _root(eps, k):
    return max(float(eps), 0.0) ** (k / 7.0)


@dataclass(frozen=True)
class Restriction:
    n: int
    X: int
    Y: int

    def __post_init__(self):
        if bin(self.X).count("1") != bin(self.Y).count("1"):
            raise ValidationError("restriction sides must have equal size")
        full = (1 << self.n) - 1
        if self.X & ~full or self.Y & ~full:
            raise ValidationError("restriction mask exceeds [n]")

    @property
    def size(self):
        return bin(self.X).count("1")

    def rows(self):
        return [i for i in range(self.n) if self.X >> i & 1]

    def cols(self):
        return [j for j in range(self.n) if self.Y >> j & 1]

    def complement(self):
        full = (1 << self.n) - 1
        return Restriction(self.n, full & ~self.X, full & ~self.Y)

    @classmethod
    def from_sets(cls, n, X, Y):
        return cls(n, sum(1 << i for i in X), sum(1 << j for j in Y))


@dataclass(frozen=True)
class GoodnessParams:
    """Thresholds for typicality, partition goodness and diagonal structure.

    ``tol_center`` is the partition tolerance (default 25 eps^(1/7));
    ``tol_large`` the large/small tolerance (default 50 eps^(1/7)). Both are
    floored at :data:`TOL_FLOOR`.
    """

    epsilon: float
    c: float
    tol_center: float
    tol_large: float

    @classmethod
    def from_epsilon(cls, epsilon, c, tol_center=None, tol_large=None):
        root = _root(epsilon, 1)
        tc = 25.0 * root if tol_center is None else tol_center
        tl = 50.0 * root if tol_large is None else tol_large
        return cls(float(epsilon), float(c), max(tc, TOL_FLOOR), max(tl, TOL_FLOOR))

    @classmethod
    def from_matrix(cls, M, **overrides):
        return cls.from_epsilon(M.epsilon, M.c, **overrides)

    @property
    def center_target(self):
        return self.c - 0.5

    @property
    def boolean_targets(self):
        return (-self.c - 0.5, 1.5 - self.c)

    @property
    def large_targets(self):
        return (2.0 * self.c, 2.0 * (1.0 - self.c))


def sample_restriction(n, rng):
    Xb = rng.random(n) < 0.5
    k = int(Xb.sum())
    Y = rng.permutation(n)[:k]
    return Restriction(n, sum(1 << int(i) for i in np.flatnonzero(Xb)), sum(1 << int(j) for j in Y))


def sample_restriction_masks(n, size, rng):
    """``size`` draws from R as boolean (size, n) arrays ``(X, Y)``."""
    X = rng.random((size, n)) < 0.5
    k = X.sum(axis=1)
    order = np.argsort(rng.random((size, n)), axis=1)
    pos = np.empty_like(order)
    np.put_along_axis(pos, order, np.arange(n)[None, :].repeat(size, axis=0), axis=1)
    Y = pos < k[:, None]
    return X, Y


def restriction_mean(M, r):
    """m(X, Y) = E over T_{X,Y} of g1 = (1/|X|) sum_{i in X, j in Y} a[i, j]; 0 for X empty."""
    if r.size == 0:
        return 0.0
    return float(M.a[np.ix_(r.rows(), r.cols())].sum() / r.size)


def restriction_means(M, X, Y):
    """Vectorised :func:`restriction_mean` over boolean mask arrays."""
    Xf = X.astype(np.float64)
    sums = np.einsum("si,ij,sj->s", Xf, M.a, Y.astype(np.float64))
    k = X.sum(axis=1)
    return np.where(k > 0, sums / np.maximum(k, 1), 0.0)


@dataclass(frozen=True)
class MomentReport:
    samples: int
    mean_hat: float
    mean_stderr: float
    mean_target: float
    var_hat: float
    var_stderr: float
    var_bound: float

    @property
    def mean_ok(self):
        return abs(self.mean_hat - self.mean_target) <= 3.0 * self.mean_stderr + 1e-15

    @property
    def var_bound_ok(self):
        return self.var_hat <= self.var_bound + 3.0 * self.var_stderr

    def to_dict(self):
        d = asdict(self)
        d.update(mean_ok=self.mean_ok, var_bound_ok=self.var_bound_ok)
        return d


def moment_check(M, samples, rng):
    """Monte Carlo mean and variance of m(X, Y) under R.

    The mean is compared with c - 1/2 and the variance with 1/(2n).
    """
    if samples < 1000:
        raise ValidationError("moment_check needs at least 1000 samples")
    X, Y = sample_restriction_masks(M.n, samples, rng)
    m = restriction_means(M, X, Y)
    mean = float(m.mean())
    var = float(m.var(ddof=1))
    centred = m - mean
    m4 = float((centred**4).mean())
    var_se = float(np.sqrt(max(m4 - var * var, 0.0) / samples))
    return MomentReport(
        samples=samples,
        mean_hat=mean,
        mean_stderr=float(np.sqrt(var / samples)),
        mean_target=M.c - 0.5,
        var_hat=var,
        var_stderr=var_se,
        var_bound=1.0 / (2 * M.n),
    )


def exact_restriction_moments(M):
    """Mean and variance of m(X, Y) under R by enumerating every restriction."""
    n, a = M.n, np.asarray(M.a)
    if n > 12:
        raise ValidationError("exact restriction moments need n <= 12")
    subsets_by_size = [[] for _ in range(n + 1)]
    for mask in range(1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        subsets_by_size[len(idx)].append(idx)
    mean = 0.0
    second = 0.0
    for k in range(1, n + 1):
        subs = subsets_by_size[k]
        # rows: sum over X of the row-restricted matrix; cols likewise
        weight = 1.0 / (2**n * comb(n, k))
        for Xs in subs:
            rowsum = a[Xs].sum(axis=0)
            for Ys in subs:
                m = rowsum[Ys].sum() / k
                mean += weight * m
                second += weight * m * m
    return mean, second - mean * mean


def restriction_variance(M):
    """Closed-form variance of m(X, Y) under R.

    Valid for any matrix whose rows and columns all sum to s = 2c - 1:

        V = ((n+1) A + n(n-3) s^2) / (4n(n-1)^2) - 2^-n (A - s^2)/(n-1)^2

    with A = sum a^2; the last term accounts for X = empty, where m = 0.
    """
    n = M.n
    A = float((np.asarray(M.a) ** 2).sum())
    s = 2.0 * M.c - 1.0
    main = ((n + 1) * A + n * (n - 3) * s * s) / (4.0 * n * (n - 1) ** 2)
    return main - (A - s * s) / ((n - 1) ** 2 * 2.0**n)


def restriction_variance_eps0(n, c):
    """(n+1)/(4n(n-1)) - (2c-1)^2/(2n(n-1)).

    This is :func:`restriction_variance` at eps = 0 without the X = empty
    correction, hence an upper bound for every family of measure c.
    """
    return (n + 1) / (4.0 * n * (n - 1)) - (2 * c - 1) ** 2 / (2.0 * n * (n - 1))


def decompose_g(M, r, p):
    """(g1, g2) at ``p`` in T_{X,Y}; g1 + g2 = f_1(p)."""
    imgs = p.images if isinstance(p, P.Permutation) else tuple(p)
    if sum(1 << imgs[i] for i in r.rows()) != r.Y:
        raise ValidationError("permutation does not map X onto Y")
    inside = r.X
    g1 = 0.0
    g2 = 0.0
    for i, j in enumerate(imgs):
        if inside >> i & 1:
            g1 += M.a[i, j]
        else:
            g2 += M.a[i, j]
    return g1, g2


def restricted_perms(r):
    """All permutations in T_{X,Y} as an int64 array (n <= 9)."""
    perms = P.all_perms(r.n)
    rows = r.rows()
    if not rows:
        return perms
    inY = np.zeros(r.n, dtype=bool)
    inY[r.cols()] = True
    return perms[np.all(inY[perms[:, rows]], axis=1)]


@dataclass(frozen=True)
class TypicalityReport:
    a_ok: bool
    b_ok: bool
    c_ok: bool
    non_boolean_fraction: float
    g1_mean: float
    g2_mean: float
    l2_deviation: float

    @property
    def typical(self):
        return self.a_ok and self.b_ok and self.c_ok


def typicality(M, r, params):
    """The three typicality conditions for ``r``, by enumerating T_{X,Y}.

    (a) |g| is eps^(1/7)-close to 1 outside a set of measure eps^(4/7);
    (b) E[g1] and E[g2] are eps^(1/7)-close to c - 1/2;
    (c) E[(|g| - 1)^2] <= eps^(6/7).
    """
    e1 = max(_root(params.epsilon, 1), TOL_FLOOR)
    e4 = max(_root(params.epsilon, 4), TOL_FLOOR)
    e6 = max(_root(params.epsilon, 6), TOL_FLOOR)
    perms = restricted_perms(r)
    g = pj.evaluate_f1_array(M, perms)
    bad = float(np.mean(np.abs(np.abs(g) - 1.0) > e1))
    g1 = restriction_mean(M, r)
    g2 = restriction_mean(M, r.complement())
    l2 = float(np.mean((np.abs(g) - 1.0) ** 2))
    target = params.center_target
    return TypicalityReport(
        a_ok=bad <= e4,
        b_ok=abs(g1 - target) <= e1 and abs(g2 - target) <= e1,
        c_ok=l2 <= e6,
        non_boolean_fraction=bad,
        g1_mean=g1,
        g2_mean=g2,
        l2_deviation=l2,
    )


def typicality_rate(M, params, samples, rng):
    """Fraction of ``samples`` restrictions drawn from R that are typical."""
    hits = 0
    for _ in range(samples):
        if typicality(M, sample_restriction(M.n, rng), params).typical:
            hits += 1
    return hits / samples


def _near(x, targets, tol):
    return min(abs(x - t) for t in targets) <= tol


def _partition_good_sums(P1, P2, params):
    tol = params.tol_center
    c0 = params.center_target
    bt = params.boolean_targets
    d1 = np.abs(P1 - c0) <= tol
    d2 = np.minimum(np.abs(P2 - bt[0]), np.abs(P2 - bt[1])) <= tol
    e1 = np.abs(P2 - c0) <= tol
    e2 = np.minimum(np.abs(P1 - bt[0]), np.abs(P1 - bt[1])) <= tol
    return (d1 & d2) | (e1 & e2)


def diagonal(M, p):
    imgs = p.images if isinstance(p, P.Permutation) else tuple(p)
    return np.asarray(M.a)[np.arange(M.n), np.asarray(imgs)]


def partition_good(M, p, X, params):
    """Whether the split of the diagonal of ``p`` by the row mask ``X`` is good."""
    s = diagonal(M, p)
    inside = np.array([X >> i & 1 for i in range(M.n)], dtype=bool)
    P1 = float(s[inside].sum())
    P2 = float(s[~inside].sum())
    return bool(_partition_good_sums(np.array([P1]), np.array([P2]), params)[0])


@dataclass(frozen=True)
class PermutationGoodness:
    fraction: float
    stderr: float
    samples: int
    exact: bool

    @property
    def is_good(self):
        return self.fraction >= 0.8


def permutation_good(M, p, params, partition_samples=1000, rng=None, exact=False):
    """Fraction of partitions X (uniform over subsets of [n]) good for ``p``.

    ``exact=True`` enumerates all 2^n partitions (n <= 20).
    """
    s = diagonal(M, p)
    n = M.n
    total = float(s.sum())
    if exact:
        if n > 20:
            raise ValidationError("exact partition enumeration needs n <= 20")
        masks = np.arange(1 << n, dtype=np.int64)
        X = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    else:
        if partition_samples < 100:
            raise ValidationError("permutation_good needs at least 100 partition samples")
        X = rng.random((partition_samples, n)) < 0.5
    P1 = X.astype(np.float64) @ s
    good = _partition_good_sums(P1, total - P1, params)
    frac = float(good.mean())
    N = len(good)
    se = 0.0 if exact else float(np.sqrt(frac * (1 - frac) / N))
    return PermutationGoodness(frac, se, N, exact)


@dataclass(frozen=True)
class DiagonalStructure:
    large_count: int
    large_position: int
    max_small: float
    conforms: bool


def diagonal_structure(M, p, params):
    """Classify the diagonal of ``p``: conforming diagonals have exactly one
    entry with magnitude near {2c, 2(1-c)} and every other entry at most
    ``tol_large`` in magnitude."""
    s = np.abs(diagonal(M, p))
    tol = params.tol_large
    t0, t1 = params.large_targets
    large = np.minimum(np.abs(s - t0), np.abs(s - t1)) <= tol
    count = int(large.sum())
    pos = int(np.flatnonzero(large)[0]) if count else -1
    rest = s[~large]
    max_small = float(rest.max()) if len(rest) else 0.0
    return DiagonalStructure(count, pos, max_small, count == 1 and max_small <= tol)

