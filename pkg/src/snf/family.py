"""Families of permutations and real functions on S_n.

A :class:`BooleanFamily` is either *explicit* (a membership vector over all
n! ranks) or *symbolic*: a union of pairwise-disjoint 1-cosets that share one
line of the n x n coset grid, plus sparse lists of added and removed
permutations. ``T[i, j]`` is the 1-coset {sigma : sigma(i) = j}; a *row*
union is ``U_{j in S} T[i, j]`` for a fixed ``i`` (the image of ``i`` decides
membership), a *column* union is ``U_{i in S} T[i, j]`` for a fixed ``j``.

Functions use the uniform probability measure: <f, g> = E[f g].
"""
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from snf import perm as P
from snf.errors import CapacityError, ValidationError

MAX_EXCEPTIONS = 10**6

ROW = "row"
COLUMN = "column"


@dataclass(frozen=True, eq=False)
class BooleanFamily:
    """A subset F of S_n.

    Build with :meth:`explicit`, :meth:`from_ranks`, :meth:`from_perms` or
    :meth:`symbolic` rather than the raw constructor.
    """

    n: int
    member: np.ndarray = None
    line: str = None
    index: int = None
    cosets: frozenset = frozenset()
    added: frozenset = frozenset()
    removed: frozenset = frozenset()
    _size: int = field(default=None, repr=False)

    # -- construction -----------------------------------------------------
    @classmethod
    def explicit(cls, member):
        member = np.asarray(member, dtype=bool)
        N = len(member)
        n = _n_from_factorial(N)
        member = member.copy()
        member.setflags(write=False)
        return cls(n=n, member=member, _size=int(member.sum()))

    @classmethod
    def from_ranks(cls, n, ranks):
        if n > P.MAX_DENSE_N:
            raise CapacityError(f"explicit families need n <= {P.MAX_DENSE_N}")
        member = np.zeros(factorial(n), dtype=bool)
        member[np.asarray(list(ranks), dtype=np.int64)] = True
        return cls.explicit(member)

    @classmethod
    def from_perms(cls, n, perms):
        perms = list(perms)
        if not perms:
            return cls.from_ranks(n, [])
        arr = np.array([tuple(p) for p in perms], dtype=np.int64)
        if arr.shape[1] != n:
            raise ValidationError(f"permutation length {arr.shape[1]} does not match n={n}")
        for row in arr:
            P.Permutation(tuple(row))
        return cls.from_ranks(n, P.rank_array(arr))

    @classmethod
    def symbolic(cls, n, line, index, cosets, added=(), removed=()):
        """Union of ``T[index, j]`` (row) or ``T[i, index]`` (column) over
        ``cosets``, with explicit exceptions given as permutation ranks."""
        if line not in (ROW, COLUMN):
            raise ValidationError(f"line must be 'row' or 'column', got {line!r}")
        if not 0 <= index < n:
            raise ValidationError(f"line index {index} out of range for n={n}")
        cosets = frozenset(int(j) for j in cosets)
        if any(not 0 <= j < n for j in cosets):
            raise ValidationError("coset index out of range")
        added = frozenset(int(r) for r in added)
        removed = frozenset(int(r) for r in removed)
        if len(added) + len(removed) > MAX_EXCEPTIONS:
            raise CapacityError(f"at most {MAX_EXCEPTIONS} exception ranks are supported")
        fam = cls(n=n, line=line, index=index, cosets=cosets, added=added, removed=removed)
        for r in added:
            if fam._in_union(P.unrank(r, n)):
                raise ValidationError(f"added rank {r} already lies in the coset union")
        for r in removed:
            if not fam._in_union(P.unrank(r, n)):
                raise ValidationError(f"removed rank {r} is not in the coset union")
        size = len(cosets) * factorial(n - 1) + len(added) - len(removed)
        object.__setattr__(fam, "_size", size)
        return fam

    # -- basic properties --------------------------------------------------
    @property
    def is_explicit(self):
        return self.member is not None

    @property
    def size(self):
        return self._size

    @property
    def c(self):
        """Measure |F| / n!."""
        return self._size / factorial(self.n)

    @property
    def eta(self):
        return min(self.c, 1.0 - self.c)

    def coset_pairs(self):
        """The symbolic 1-cosets as (i, j) pairs (zero-based)."""
        if self.line == ROW:
            return sorted((self.index, j) for j in self.cosets)
        return sorted((i, self.index) for i in self.cosets)

    def _in_union(self, p):
        if self.line == ROW:
            return p.images[self.index] in self.cosets
        return p.images.index(self.index) in self.cosets

    def __contains__(self, p):
        if not isinstance(p, P.Permutation):
            p = P.Permutation(tuple(p))
        if self.is_explicit:
            return bool(self.member[P.rank(p)])
        r = P.rank(p)
        if r in self.added:
            return True
        return self._in_union(p) and r not in self.removed

    def contains_array(self, perms):
        """Vectorised membership for an (N, n) array of permutations."""
        perms = np.asarray(perms, dtype=np.int64)
        if self.is_explicit:
            return self.member[P.rank_array(perms)]
        if self.line == ROW:
            col = perms[:, self.index]
        else:
            col = np.argmax(perms == self.index, axis=1)
        inside = np.isin(col, np.fromiter(self.cosets, dtype=np.int64, count=len(self.cosets)))
        if self.added or self.removed:
            keys = self._exception_keys()
            for k, row in enumerate(perms):
                hit = keys.get(row.tobytes())
                if hit is not None:
                    inside[k] = hit
        return inside

    def _exception_keys(self):
        keys = self.__dict__.get("_keys")
        if keys is None:
            keys = {}
            for r in self.added:
                keys[np.asarray(P.unrank(r, self.n).images, dtype=np.int64).tobytes()] = True
            for r in self.removed:
                keys[np.asarray(P.unrank(r, self.n).images, dtype=np.int64).tobytes()] = False
            object.__setattr__(self, "_keys", keys)
        return keys

    def member_ranks(self):
        """Sorted ranks of the members (explicit families)."""
        return np.flatnonzero(materialize(self).member)

    def __eq__(self, other):
        if not isinstance(other, BooleanFamily) or other.n != self.n:
            return NotImplemented
        if self.is_explicit or other.is_explicit:
            return bool(np.array_equal(materialize(self).member, materialize(other).member))
        return (self.line, self.index, self.cosets, self.added, self.removed) == (
            other.line, other.index, other.cosets, other.added, other.removed
        ) or bool(np.array_equal(materialize(self).member, materialize(other).member))

    __hash__ = None


def _n_from_factorial(N):
    n, f = 1, 1
    while f < N:
        n += 1
        f *= n
    if f != N:
        raise ValidationError(f"membership vector length {N} is not a factorial")
    return n


@dataclass(frozen=True, eq=False)
class RealFunction:
    """A real function on S_n stored densely by permutation rank."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (factorial(self.n),):
            raise ValidationError(f"expected {factorial(self.n)} values for n={self.n}")
        object.__setattr__(self, "values", vals)

    def __add__(self, other):
        _same_n(self, other)
        return RealFunction(self.n, self.values + other.values)

    def __sub__(self, other):
        _same_n(self, other)
        return RealFunction(self.n, self.values - other.values)

    def __mul__(self, k):
        return RealFunction(self.n, self.values * k)

    __rmul__ = __mul__

    def mean(self):
        return float(self.values.mean())

    def norm(self):
        return float(np.sqrt(inner_product(self, self)))


def _same_n(f, g):
    if f.n != g.n:
        raise ValidationError(f"functions live on S_{f.n} and S_{g.n}")


def constant(n, value=1.0):
    return RealFunction(n, np.full(factorial(n), float(value)))


def coset_indicator(n, I, J):
    """Indicator of the t-coset {sigma : sigma(I[k]) = J[k] for all k}."""
    perms = P.all_perms(n)
    mask = np.ones(len(perms), dtype=bool)
    for i, j in zip(I, J):
        mask &= perms[:, i] == j
    return RealFunction(n, mask.astype(np.float64))


def sign_function(n):
    return RealFunction(n, P.all_signs(n).astype(np.float64))


def materialize(F):
    """Explicit copy of ``F``; explicit input is returned unchanged."""
    if F.is_explicit:
        return F
    if F.n > P.MAX_DENSE_N:
        raise CapacityError(f"cannot materialise a family on S_{F.n}; need n <= {P.MAX_DENSE_N}")
    perms = P.all_perms(F.n)
    if F.line == ROW:
        col = perms[:, F.index]
    else:
        col = np.argmax(perms == F.index, axis=1)
    member = np.isin(col, np.fromiter(F.cosets, dtype=np.int64, count=len(F.cosets)))
    if F.added:
        member[np.fromiter(F.added, dtype=np.int64)] = True
    if F.removed:
        member[np.fromiter(F.removed, dtype=np.int64)] = False
    return BooleanFamily.explicit(member)


def complement(F):
    if F.is_explicit:
        return BooleanFamily.explicit(~F.member)
    rest = frozenset(range(F.n)) - F.cosets
    return BooleanFamily.symbolic(F.n, F.line, F.index, rest, added=F.removed, removed=F.added)


def signed_indicator(F):
    """f = 2 chi_F - 1 as a dense function."""
    E = materialize(F)
    return RealFunction(F.n, np.where(E.member, 1.0, -1.0))


def inner_product(f, g):
    _same_n(f, g)
    return float(np.dot(f.values, g.values) / len(f.values))


def sign_correlation(f):
    """<f, sgn> = E[sgn(pi) f(pi)]."""
    return float(np.dot(P.all_signs(f.n), f.values) / len(f.values))


def coset_count(F, i, j):
    """|F intersect T[i, j]| as an exact integer."""
    if F.is_explicit:
        perms = P.all_perms(F.n)
        return int(F.member[perms[:, i] == j].sum())
    n = F.n
    if F.line == ROW:
        a, cols = F.index, F.cosets
        hit = sum(_pair_overlap(n, (a, b), (i, j)) for b in cols)
    else:
        b, rows = F.index, F.cosets
        hit = sum(_pair_overlap(n, (a, b), (i, j)) for a in rows)
    for r in F.added:
        if P.unrank(r, n).images[i] == j:
            hit += 1
    for r in F.removed:
        if P.unrank(r, n).images[i] == j:
            hit -= 1
    return hit


def _pair_overlap(n, coset, target):
    """|T[a, b] intersect T[i, j]|."""
    (a, b), (i, j) = coset, target
    if (a, b) == (i, j):
        return factorial(n - 1)
    if a == i or b == j:
        return 0
    return factorial(n - 2)


def coset_count_matrix(F):
    """n x n matrix of |F intersect T[i, j]|.

    int64 for n <= 20, otherwise an object array of Python ints.
    """
    n = F.n
    if F.is_explicit:
        perms = P.all_perms(n)
        flat = perms[F.member] + (np.arange(n) * n)
        counts = np.bincount(flat.ravel(), minlength=n * n).reshape(n, n)
        return counts.astype(np.int64)
    dtype = np.int64 if n <= 20 else object
    counts = np.zeros((n, n), dtype=dtype)
    full, part = factorial(n - 1), factorial(n - 2) if n >= 2 else 0
    k = len(F.cosets)
    if F.line == ROW:
        a = F.index
        for i in range(n):
            for j in range(n):
                if i == a:
                    counts[i, j] = full if j in F.cosets else 0
                else:
                    counts[i, j] = part * (k - (1 if j in F.cosets else 0))
    else:
        b = F.index
        for i in range(n):
            for j in range(n):
                if j == b:
                    counts[i, j] = full if i in F.cosets else 0
                else:
                    counts[i, j] = part * (k - (1 if i in F.cosets else 0))
    for r in F.added:
        imgs = P.unrank(r, n).images
        for i in range(n):
            counts[i, imgs[i]] += 1
    for r in F.removed:
        imgs = P.unrank(r, n).images
        for i in range(n):
            counts[i, imgs[i]] -= 1
    return counts


def dictatorship(n, line, index, cosets):
    """Symbolic single-line union of 1-cosets."""
    return BooleanFamily.symbolic(n, line, index, cosets)


def random_family(n, size, rng):
    """Uniformly random explicit family of the given size."""
    N = factorial(n)
    member = np.zeros(N, dtype=bool)
    member[rng.choice(N, size=size, replace=False)] = True
    return BooleanFamily.explicit(member)
