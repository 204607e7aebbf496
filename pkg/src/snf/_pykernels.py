"""Pure numpy implementations of the hot loops.

Used when the compiled extension is unavailable, or when ``SNF_PURE_PYTHON=1``.
Every function returns exactly what its counterpart in ``_ckernels`` returns.
"""
import itertools
from functools import lru_cache
from math import factorial

import numpy as np

_FACT = np.array([factorial(k) for k in range(21)], dtype=np.int64)


def _popcount(x):
    x = np.asarray(x, dtype=np.uint64)
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(x).astype(np.int64)
    out = np.zeros(x.shape, dtype=np.int64)
    for shift in range(0, 64, 8):
        out += _BYTE_POP[((x >> np.uint64(shift)) & np.uint64(0xFF)).astype(np.intp)]
    return out


_BYTE_POP = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def lex_rank(perms):
    P = np.ascontiguousarray(perms, dtype=np.int64)
    if P.ndim != 2:
        raise ValueError("perms must be 2-d")
    n = P.shape[1]
    if n > 20:
        raise ValueError("lex_rank supports n <= 20")
    r = np.zeros(P.shape[0], dtype=np.int64)
    for i in range(n - 1):
        smaller = (P[:, i + 1:] < P[:, i:i + 1]).sum(axis=1)
        r += smaller * _FACT[n - 1 - i]
    return r


def lex_unrank_all(n):
    if n < 1 or n > 12:
        raise ValueError("enumeration supports 1 <= n <= 12")
    out = np.fromiter(
        itertools.chain.from_iterable(itertools.permutations(range(n))),
        dtype=np.int64,
        count=factorial(n) * n,
    )
    return out.reshape(factorial(n), n)


@lru_cache(maxsize=4)
def _cached_table(n):
    perms = lex_unrank_all(n)
    cols = []
    for a in range(n):
        for b in range(a + 1, n):
            swapped = perms.copy()
            swapped[perms == a] = b
            swapped[perms == b] = a
            cols.append(lex_rank(swapped).astype(np.int32))
    if not cols:
        return np.zeros((len(perms), 0), dtype=np.int32)
    table = np.stack(cols, axis=1)
    table.setflags(write=False)
    return table


def neighbor_table(n):
    if n < 1 or n > 12:
        raise ValueError("neighbor table supports 1 <= n <= 12")
    return _cached_table(n).copy()


def edge_boundary(member, n):
    if n < 1 or n > 12:
        raise ValueError("edge boundary supports 1 <= n <= 12")
    m = np.asarray(member, dtype=bool)
    if m.shape[0] != factorial(n):
        raise ValueError("membership vector must have length n!")
    table = _cached_table(n)
    return int((~m[table[m]]).sum())


def diagonal_large_counts(L):
    """Return ``(zero, one)``: diagonals of ``L`` with no / exactly one true entry."""
    A = np.asarray(L, dtype=bool)
    m = A.shape[0]
    if A.ndim != 2 or A.shape[1] != m:
        raise ValueError("L must be square")
    if m == 0:
        return 1, 0
    if m > 20:
        raise ValueError("exact diagonal counting supports m <= 20")
    tot0 = 0
    tot1 = 0
    large = A.astype(np.int64)
    small = 1 - large
    g_all = np.arange(1, 1 << m, dtype=np.int64)
    for start in range(0, len(g_all), 1 << 16):
        g = g_all[start:start + (1 << 16)]
        bits = (g[:, None] >> np.arange(m)) & 1
        s = bits @ small.T
        l = bits @ large.T
        # products wrap modulo 2**64; the final totals are exact
        p0 = np.ones(len(g), dtype=np.uint64)
        p1 = np.zeros(len(g), dtype=np.uint64)
        su = s.astype(np.uint64)
        lu = l.astype(np.uint64)
        for i in range(m):
            p1 = p1 * su[:, i] + p0 * lu[:, i]
            p0 = p0 * su[:, i]
        neg = ((m - bits.sum(axis=1)) & 1).astype(bool)
        tot0 += int(p0[~neg].sum(dtype=np.uint64)) - int(p0[neg].sum(dtype=np.uint64))
        tot1 += int(p1[~neg].sum(dtype=np.uint64)) - int(p1[neg].sum(dtype=np.uint64))
    wrap = 1 << 64
    tot0 %= wrap
    tot1 %= wrap
    if tot0 >= wrap // 2:
        tot0 -= wrap
    if tot1 >= wrap // 2:
        tot1 -= wrap
    return tot0, tot1


def permanent(A):
    M = np.asarray(A, dtype=np.float64)
    m = M.shape[0]
    if M.ndim != 2 or M.shape[1] != m:
        raise ValueError("matrix must be square")
    if m == 0:
        return 1.0
    if m > 30:
        raise ValueError("Ryser permanent supports m <= 30")
    total = 0.0
    g_all = np.arange(1, 1 << m, dtype=np.int64)
    for start in range(0, len(g_all), 1 << 16):
        g = g_all[start:start + (1 << 16)]
        bits = ((g[:, None] >> np.arange(m)) & 1).astype(np.float64)
        prods = np.prod(bits @ M.T, axis=1)
        sign = np.where((m - bits.sum(axis=1).astype(np.int64)) & 1, -1.0, 1.0)
        total += float(np.dot(sign, prods))
    return total


def exhaustive_boundary_scan(nbr_masks):
    """Minimum edge boundary over all vertex subsets of each size.

    Subsets are visited in reflected Gray-code order so ties resolve to the
    same witness as the compiled scan.
    """
    nb = np.asarray(nbr_masks, dtype=np.uint64)
    V = len(nb)
    if V > 40:
        raise ValueError("exhaustive scan supports at most 40 vertices")
    deg = int(_popcount(nb[:1])[0]) if V else 0
    big = np.iinfo(np.int64).max
    best = np.full(V + 1, big, dtype=np.int64)
    wit = np.zeros(V + 1, dtype=np.uint64)
    best[0] = 0
    chunk = 1 << 20
    for start in range(1, 1 << V, chunk):
        g = np.arange(start, min(start + chunk, 1 << V), dtype=np.uint64)
        cur = g ^ (g >> np.uint64(1))
        B = np.zeros(len(g), dtype=np.int64)
        size = np.zeros(len(g), dtype=np.int64)
        for v in range(V):
            inside = ((cur >> np.uint64(v)) & np.uint64(1)).astype(bool)
            size += inside
            out_edges = deg - _popcount(nb[v] & cur)
            B += np.where(inside, out_edges, 0)
        for k in np.unique(size):
            sel = np.flatnonzero(size == k)
            j = sel[np.argmin(B[sel])]
            if B[j] < best[k]:
                best[k] = B[j]
                wit[k] = cur[j]
    return best, wit
