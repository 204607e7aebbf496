# cython: language_level=3
"""Compiled hot loops. Signatures mirror :mod:`snf._pykernels` exactly."""
import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

DEF MAXN = 20

cdef int64_t _FACT[MAXN + 1]
_FACT[0] = 1
for _k in range(1, MAXN + 1):
    _FACT[_k] = _FACT[_k - 1] * _k


cdef inline int64_t _rank(const int64_t* p, int n) noexcept nogil:
    cdef uint64_t seen = 0
    cdef int64_t r = 0
    cdef int i
    for i in range(n - 1, -1, -1):
        r += __builtin_popcountll(seen & ((<uint64_t>1 << p[i]) - 1)) * _FACT[n - 1 - i]
        seen |= <uint64_t>1 << p[i]
    return r


cdef inline bint _next_perm(int64_t* p, int n) noexcept nogil:
    cdef int i = n - 2
    cdef int j
    cdef int64_t t
    while i >= 0 and p[i] > p[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = n - 1
    while p[j] < p[i]:
        j -= 1
    t = p[i]; p[i] = p[j]; p[j] = t
    i += 1
    j = n - 1
    while i < j:
        t = p[i]; p[i] = p[j]; p[j] = t
        i += 1
        j -= 1
    return True


def lex_rank(perms):
    cdef const int64_t[:, ::1] P = np.ascontiguousarray(perms, dtype=np.int64)
    cdef Py_ssize_t N = P.shape[0]
    cdef int n = P.shape[1]
    if n > MAXN:
        raise ValueError("lex_rank supports n <= 20")
    out = np.empty(N, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(N):
            o[k] = _rank(&P[k, 0], n)
    return out


def lex_unrank_all(int n):
    if n < 1 or n > 12:
        raise ValueError("enumeration supports 1 <= n <= 12")
    cdef int64_t N = _FACT[n]
    out = np.empty((N, n), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef int64_t buf[MAXN]
    cdef int i
    cdef int64_t r
    for i in range(n):
        buf[i] = i
    with nogil:
        for r in range(N):
            for i in range(n):
                o[r, i] = buf[i]
            _next_perm(buf, n)
    return out


def neighbor_table(int n):
    if n < 1 or n > 12:
        raise ValueError("neighbor table supports 1 <= n <= 12")
    cdef int64_t N = _FACT[n]
    cdef int T = n * (n - 1) // 2
    out = np.empty((N, T), dtype=np.int32)
    cdef int32_t[:, ::1] o = out
    cdef int64_t buf[MAXN]
    cdef int64_t pos[MAXN]
    cdef int i, a, b, t, pa, pb
    cdef int64_t r
    for i in range(n):
        buf[i] = i
    with nogil:
        for r in range(N):
            for i in range(n):
                pos[buf[i]] = i
            t = 0
            for a in range(n):
                for b in range(a + 1, n):
                    pa = pos[a]; pb = pos[b]
                    buf[pa] = b; buf[pb] = a
                    o[r, t] = <int32_t>_rank(buf, n)
                    buf[pa] = a; buf[pb] = b
                    t += 1
            _next_perm(buf, n)
    return out


def edge_boundary(member, int n):
    if n < 1 or n > 12:
        raise ValueError("edge boundary supports 1 <= n <= 12")
    cdef const uint8_t[::1] m = np.ascontiguousarray(member, dtype=np.uint8)
    cdef int64_t N = _FACT[n]
    if m.shape[0] != N:
        raise ValueError("membership vector must have length n!")
    cdef int64_t buf[MAXN]
    cdef int64_t pos[MAXN]
    cdef int i, a, b, pa, pb
    cdef int64_t r, total = 0
    for i in range(n):
        buf[i] = i
    with nogil:
        for r in range(N):
            if m[r]:
                for i in range(n):
                    pos[buf[i]] = i
                for a in range(n):
                    for b in range(a + 1, n):
                        pa = pos[a]; pb = pos[b]
                        buf[pa] = b; buf[pb] = a
                        if not m[_rank(buf, n)]:
                            total += 1
                        buf[pa] = a; buf[pb] = b
            _next_perm(buf, n)
    return int(total)


def diagonal_large_counts(L):
    """Return ``(zero, one)``: diagonals of ``L`` with no / exactly one true entry."""
    cdef const uint8_t[:, ::1] A = np.ascontiguousarray(L, dtype=np.uint8)
    cdef int m = A.shape[0]
    if A.shape[1] != m:
        raise ValueError("L must be square")
    if m == 0:
        return 1, 0
    if m > MAXN:
        raise ValueError("exact diagonal counting supports m <= 20")
    cdef uint64_t s[MAXN]
    cdef uint64_t l[MAXN]
    cdef uint64_t p0, p1, tot0 = 0, tot1 = 0
    cdef uint64_t g, prev = 0, cur, limit = (<uint64_t>1) << m
    cdef int i, j, size = 0, sign
    for i in range(m):
        s[i] = 0
        l[i] = 0
    with nogil:
        for g in range(1, limit):
            cur = g ^ (g >> 1)
            j = __builtin_ctzll(cur ^ prev)
            if cur & ((<uint64_t>1) << j):
                size += 1
                for i in range(m):
                    if A[i, j]:
                        l[i] += 1
                    else:
                        s[i] += 1
            else:
                size -= 1
                for i in range(m):
                    if A[i, j]:
                        l[i] -= 1
                    else:
                        s[i] -= 1
            prev = cur
            p0 = 1
            p1 = 0
            for i in range(m):
                p1 = p1 * s[i] + p0 * l[i]
                p0 = p0 * s[i]
            if (m - size) & 1:
                tot0 -= p0
                tot1 -= p1
            else:
                tot0 += p0
                tot1 += p1
    return int(<int64_t>tot0), int(<int64_t>tot1)


def permanent(A):
    cdef const double[:, ::1] M = np.ascontiguousarray(A, dtype=np.float64)
    cdef int m = M.shape[0]
    if M.shape[1] != m:
        raise ValueError("matrix must be square")
    if m == 0:
        return 1.0
    if m > 30:
        raise ValueError("Ryser permanent supports m <= 30")
    rs_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] rs = rs_arr
    cdef double prod, total = 0.0
    cdef uint64_t g, prev = 0, cur, limit = (<uint64_t>1) << m
    cdef int i, j, size = 0
    with nogil:
        for g in range(1, limit):
            cur = g ^ (g >> 1)
            j = __builtin_ctzll(cur ^ prev)
            if cur & ((<uint64_t>1) << j):
                size += 1
                for i in range(m):
                    rs[i] += M[i, j]
            else:
                size -= 1
                for i in range(m):
                    rs[i] -= M[i, j]
            prev = cur
            prod = 1.0
            for i in range(m):
                prod *= rs[i]
            if (m - size) & 1:
                total -= prod
            else:
                total += prod
    return total


def exhaustive_boundary_scan(nbr_masks):
    """Minimum edge boundary over all vertex subsets of each size.

    ``nbr_masks[v]`` is the neighbourhood of vertex ``v`` as a bitmask; the
    graph must be regular. Returns ``(best, witness)`` arrays indexed by size.
    """
    cdef const uint64_t[::1] nb = np.ascontiguousarray(nbr_masks, dtype=np.uint64)
    cdef int V = nb.shape[0]
    if V > 40:
        raise ValueError("exhaustive scan supports at most 40 vertices")
    cdef int deg = __builtin_popcountll(nb[0]) if V else 0
    best_arr = np.full(V + 1, np.iinfo(np.int64).max, dtype=np.int64)
    wit_arr = np.zeros(V + 1, dtype=np.uint64)
    cdef int64_t[::1] best = best_arr
    cdef uint64_t[::1] wit = wit_arr
    cdef uint64_t g, prev = 0, cur, bit, limit = (<uint64_t>1) << V
    cdef int64_t B = 0
    cdef int v, size = 0
    best[0] = 0
    wit[0] = 0
    with nogil:
        for g in range(1, limit):
            cur = g ^ (g >> 1)
            v = __builtin_ctzll(cur ^ prev)
            bit = (<uint64_t>1) << v
            if cur & bit:
                B += deg - 2 * __builtin_popcountll(nb[v] & prev)
                size += 1
            else:
                B -= deg - 2 * __builtin_popcountll(nb[v] & cur)
                size -= 1
            prev = cur
            if B < best[size]:
                best[size] = B
                wit[size] = cur
    return best_arr, wit_arr
