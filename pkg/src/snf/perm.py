"""Permutations of {0, ..., n-1}: lexicographic ranking, group operations, and
the transposition Cayley graph.

Ranks are lexicographic on image arrays (Lehmer code read in mixed radix), so
rank 0 is the identity and rank n!-1 is the reversal. Every dense array over
S_n in this package is indexed by this rank.
"""
from dataclasses import dataclass
from math import factorial

import numpy as np

from snf import kernels
from snf.errors import CapacityError, ValidationError

MAX_ENUM_N = 12
"""Largest n for which all of S_n may be enumerated."""

MAX_DENSE_N = 9
"""Largest n for which dense functions on S_n (length n!) are stored."""


@dataclass(frozen=True)
class Permutation:
    """A bijection of {0, ..., n-1} given by its image array."""

    images: tuple

    def __post_init__(self):
        imgs = tuple(int(x) for x in self.images)
        if not imgs:
            raise ValidationError("not a permutation: empty image array")
        if sorted(imgs) != list(range(len(imgs))):
            raise ValidationError(f"not a permutation: {list(imgs)}")
        object.__setattr__(self, "images", imgs)

    @property
    def n(self):
        return len(self.images)

    def __call__(self, i):
        return self.images[i]

    def __len__(self):
        return len(self.images)

    def __iter__(self):
        return iter(self.images)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)))

    @classmethod
    def from_one_based(cls, images):
        return cls(tuple(int(x) - 1 for x in images))

    def to_one_based(self):
        return [x + 1 for x in self.images]

    def rank(self):
        return rank(self)

    def inverse(self):
        return inverse(self)

    def sign(self):
        return sign(self)


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")


def rank(p):
    """Lexicographic rank of ``p`` in S_n (exact Python int for any n)."""
    imgs = p.images if isinstance(p, Permutation) else tuple(p)
    n = len(imgs)
    r = 0
    remaining = list(range(n))
    for i, v in enumerate(imgs):
        k = remaining.index(v)
        r += k * factorial(n - 1 - i)
        remaining.pop(k)
    return r


def unrank(k, n):
    """The permutation of lexicographic rank ``k`` in S_n."""
    _check_n(n)
    k = int(k)
    if not 0 <= k < factorial(n):
        raise ValidationError(f"rank {k} out of range for n={n}")
    remaining = list(range(n))
    out = []
    for i in range(n):
        q, k = divmod(k, factorial(n - 1 - i))
        out.append(remaining.pop(q))
    return Permutation(tuple(out))


def compose(a, b):
    """``a`` after ``b``: (a o b)(i) = a(b(i))."""
    if a.n != b.n:
        raise ValidationError(f"cannot compose permutations of sizes {a.n} and {b.n}")
    return Permutation(tuple(a.images[x] for x in b.images))


def inverse(a):
    inv = [0] * a.n
    for i, x in enumerate(a.images):
        inv[x] = i
    return Permutation(tuple(inv))


def sign(a):
    """+1 for even permutations, -1 for odd ones (via cycle count)."""
    seen = [False] * a.n
    parity = 0
    for start in range(a.n):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = a.images[j]
            length += 1
        parity ^= (length - 1) & 1
    return -1 if parity else 1


def transposition(n, x, y):
    """The transposition swapping ``x`` and ``y``."""
    imgs = list(range(n))
    imgs[x], imgs[y] = imgs[y], imgs[x]
    return Permutation(tuple(imgs))


def transposition_neighbors(a):
    """All tau o a for tau a transposition, ordered by (x, y) with x < y.

    Left multiplication swaps the *values* x and y in the image array; this is
    the neighbour convention used for every edge count in the package.
    """
    out = []
    for x in range(a.n):
        for y in range(x + 1, a.n):
            imgs = list(a.images)
            i, j = imgs.index(x), imgs.index(y)
            imgs[i], imgs[j] = y, x
            out.append(Permutation(tuple(imgs)))
    return out


def enumerate_perms(n, start=0, stop=None):
    """Yield permutations of rank ``start <= r < stop`` in rank order.

    Rank ranges let callers split S_n across workers.
    """
    _check_n(n)
    if n > MAX_ENUM_N:
        raise CapacityError(f"enumeration of S_{n} exceeds the n <= {MAX_ENUM_N} cap")
    total = factorial(n)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return
    p = list(unrank(start, n).images)
    for _ in range(start, stop):
        yield Permutation(tuple(p))
        _next_permutation(p)


def _next_permutation(p):
    i = len(p) - 2
    while i >= 0 and p[i] > p[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = len(p) - 1
    while p[j] < p[i]:
        j -= 1
    p[i], p[j] = p[j], p[i]
    p[i + 1:] = reversed(p[i + 1:])
    return True


_ALL_CACHE = {}


def all_perms(n):
    """Read-only (n!, n) int64 array of S_n in rank order."""
    _check_n(n)
    if n > MAX_DENSE_N:
        raise CapacityError(f"dense storage of S_{n} exceeds the n <= {MAX_DENSE_N} cap")
    arr = _ALL_CACHE.get(n)
    if arr is None:
        arr = kernels.lex_unrank_all(n)
        arr.setflags(write=False)
        _ALL_CACHE[n] = arr
    return arr


def rank_array(perms):
    """Vectorised lexicographic rank of each row of ``perms`` (n <= 20)."""
    perms = np.asarray(perms, dtype=np.int64)
    return kernels.lex_rank(perms)


def sign_array(perms):
    """Vectorised sign of each row of ``perms``."""
    perms = np.asarray(perms, dtype=np.int64)
    n = perms.shape[1]
    inv = np.zeros(len(perms), dtype=np.int64)
    for i in range(n - 1):
        inv += (perms[:, i + 1:] < perms[:, i:i + 1]).sum(axis=1)
    return np.where(inv & 1, -1, 1).astype(np.int8)


_SIGN_CACHE = {}


def all_signs(n):
    s = _SIGN_CACHE.get(n)
    if s is None:
        s = sign_array(all_perms(n))
        s.setflags(write=False)
        _SIGN_CACHE[n] = s
    return s


_NBR_CACHE = {}


def neighbor_table(n):
    """(n!, n(n-1)/2) ranks of tau o sigma, rows by rank of sigma.

    Columns follow the transposition order of :func:`transposition_neighbors`.
    """
    _check_n(n)
    if n > MAX_DENSE_N:
        raise CapacityError(f"neighbour table of S_{n} exceeds the n <= {MAX_DENSE_N} cap")
    t = _NBR_CACHE.get(n)
    if t is None:
        t = kernels.neighbor_table(n)
        t.setflags(write=False)
        _NBR_CACHE[n] = t
    return t


def random_perms(n, size, rng):
    """``size`` independent uniform permutations as an (size, n) int64 array."""
    return np.argsort(rng.random((size, n)), axis=1).astype(np.int64)
