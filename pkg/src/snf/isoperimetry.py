"""Edge isoperimetry on the transposition Cayley graph of S_n.

Edges join sigma and tau o sigma for every transposition tau, so each vertex
has degree n(n-1)/2. For F of measure c the boundary satisfies
|dF| >= (1 - c) n |F|, with equality exactly when chi_F lies in U_1.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from snf import family as fs
from snf import kernels
from snf import perm as P
from snf import projection as pj
from snf.errors import CapacityError, PipelineError, ValidationError

EXHAUSTIVE = "exhaustive"
LOCAL_SEARCH = "local"

EXHAUSTIVE_MAX_N = 4
LOCAL_MAX_N = 8


def edge_boundary(F):
    """Number of edges between F and its complement."""
    if F.is_explicit:
        return kernels.edge_boundary(F.member, F.n)
    if not F.added and not F.removed:
        # each member leaves the union exactly by swapping its line value
        # with one of the n - |S| values outside the coset set
        return F.size * (F.n - len(F.cosets))
    if F.n <= P.MAX_DENSE_N:
        return edge_boundary(fs.materialize(F))
    raise ValidationError("edge boundary of a perturbed symbolic family needs n <= 9")


@dataclass(frozen=True)
class BoundaryReport:
    size: int
    boundary: int
    bound: float
    slack: float
    delta0: float
    epsilon: float
    equality: bool

    @property
    def consistent(self):
        """Equality in the bound coincides with eps = 0."""
        return self.equality == (self.epsilon <= 1e-12)

    def to_dict(self):
        return {
            "size": self.size, "boundary": self.boundary, "bound": self.bound,
            "slack": self.slack, "delta0": self.delta0, "epsilon": self.epsilon,
            "equality": self.equality, "consistent": self.consistent,
        }


def diaconis_check(F):
    """Compare |dF| with (1 - c) n |F| and record eps alongside."""
    n, size = F.n, F.size
    N = factorial(n)
    B = edge_boundary(F)
    # exact rationals: the bound is (N - |F|) n |F| / N
    bound = Fraction((N - size) * n * size, N)
    slack = B - bound
    delta0 = Fraction(B, n * size) - Fraction(N - size, N) if size else Fraction(0)
    if 0 < size < factorial(n):
        eps = pj.distance_to_u1(F)[0]
    else:
        eps = 0.0
    return BoundaryReport(size, B, float(bound), float(slack), float(delta0), eps, abs(slack) <= 1e-6)


@dataclass(frozen=True, eq=False)
class IsoStabilityReport:
    delta0: float
    eps_bound: float
    eps_actual: float
    eps_signed: float
    recovery: object
    recovery_error: str = None

    def to_dict(self):
        return {
            "delta0": self.delta0,
            "eps_bound": self.eps_bound,
            "eps_actual": self.eps_actual,
            "eps_signed": self.eps_signed,
            "recovery": None if self.recovery is None else self.recovery.to_dict(),
            "recovery_error": self.recovery_error,
        }


def iso_stability(F, **recover_kwargs):
    """Boundary excess delta0 against distance to U_1, then recovery.

    The bound E[(chi - chi_1)^2] <= n/(n-2) c delta0 is stated for the 0/1
    indicator; with f = 2 chi - 1 the distance is four times larger, so
    ``eps_actual`` is eps/4 and ``eps_signed`` is eps.
    """
    from snf.recovery import recover

    if F.n < 3:
        raise ValidationError("iso_stability needs n >= 3")
    rep = diaconis_check(F)
    eps01 = rep.epsilon / 4.0
    bound = F.n / (F.n - 2) * F.c * rep.delta0
    if eps01 > bound + 1e-9:
        raise PipelineError("distance exceeds the boundary-excess bound",
                            {"eps": eps01, "bound": bound})
    try:
        res, err = recover(F, **recover_kwargs), None
    except PipelineError as exc:
        res, err = None, str(exc)
    return IsoStabilityReport(rep.delta0, bound, eps01, rep.epsilon, res, err)


def lex_segment(n, k):
    """The k lexicographically smallest permutations of S_n."""
    N = factorial(n)
    if not 0 <= k <= N:
        raise ValidationError(f"segment size must lie in [0, {N}]")
    if n > P.MAX_DENSE_N:
        raise CapacityError(f"lex segments are explicit; need n <= {P.MAX_DENSE_N}")
    member = np.zeros(N, dtype=bool)
    member[:k] = True
    return fs.BooleanFamily.explicit(member)


@dataclass(frozen=True)
class ScanRow:
    k: int
    lex_boundary: int
    best_boundary: int
    witness: tuple

    @property
    def improved(self):
        return self.best_boundary < self.lex_boundary


def _neighbor_masks(n):
    table = P.neighbor_table(n)
    masks = np.zeros(len(table), dtype=np.uint64)
    for col in range(table.shape[1]):
        masks |= np.left_shift(np.uint64(1), table[:, col].astype(np.uint64))
    return masks


def _lex_boundaries(n):
    """Boundary of every lex segment, by adding permutations in rank order."""
    table = P.neighbor_table(n)
    deg = table.shape[1]
    inside = np.zeros(len(table), dtype=bool)
    out = [0]
    B = 0
    for v in range(len(table)):
        k_in = int(inside[table[v]].sum())
        B += deg - 2 * k_in
        inside[v] = True
        out.append(B)
    return out


def _local_search(table, k, rng, max_steps):
    N, deg = table.shape
    member = np.zeros(N, dtype=bool)
    member[rng.choice(N, size=k, replace=False)] = True
    d_in = member[table].sum(axis=1)
    for _ in range(max_steps):
        ins = np.flatnonzero(member)
        outs = np.flatnonzero(~member)
        lo = d_in[ins].min()
        hi = d_in[outs].max()
        gain = hi - lo
        move = None
        if gain >= 2:
            move = (ins[np.argmin(d_in[ins])], outs[np.argmax(d_in[outs])])
        elif gain == 1:
            us = ins[d_in[ins] == lo]
            ws = outs[d_in[outs] == hi]
            for u in us:
                adj = set(table[u].tolist())
                for w in ws:
                    if int(w) not in adj:
                        move = (u, w)
                        break
                if move is not None:
                    break
        if move is None:
            break
        u, w = move
        member[u] = False
        d_in[table[u]] -= 1
        member[w] = True
        d_in[table[w]] += 1
    boundary = int(deg * k - d_in[member].sum())
    return boundary, member


def conjecture_scan(n, sizes=None, mode=EXHAUSTIVE, restarts=64, seed=0, max_steps=None):
    """Minimum boundary per size compared with the lex initial segment.

    ``exhaustive`` visits every subset (n <= 4). ``local`` runs swap-move
    descent from ``restarts`` random starts per size (n <= 8), each restart
    on its own stream derived from ``seed``. Witnesses are sorted rank tuples.
    """
    from snf.restrictions import stream

    N = factorial(n)
    if sizes is None:
        sizes = range(N + 1)
    sizes = sorted({int(k) for k in sizes})
    if any(not 0 <= k <= N for k in sizes):
        raise ValidationError(f"sizes must lie in [0, {N}]")
    lex = _lex_boundaries(n) if n <= P.MAX_DENSE_N else None
    rows = []
    if mode == EXHAUSTIVE:
        if n > EXHAUSTIVE_MAX_N:
            raise CapacityError(f"exhaustive scan needs n <= {EXHAUSTIVE_MAX_N}")
        best, wit = kernels.exhaustive_boundary_scan(_neighbor_masks(n))
        for k in sizes:
            w = int(wit[k])
            rows.append(ScanRow(k, lex[k], int(best[k]), tuple(v for v in range(N) if w >> v & 1)))
        return rows
    if mode != LOCAL_SEARCH:
        raise ValidationError(f"unknown scan mode {mode!r}")
    if n > LOCAL_MAX_N:
        raise CapacityError(f"local search needs n <= {LOCAL_MAX_N}")
    table = P.neighbor_table(n)
    if max_steps is None:
        max_steps = N
    for k in sizes:
        if k in (0, N):
            rows.append(ScanRow(k, lex[k], 0, tuple(range(k))))
            continue
        best, best_member = None, None
        for r in range(restarts):
            B, member = _local_search(table, k, stream(seed, k * restarts + r), max_steps)
            if best is None or B < best:
                best, best_member = B, member
        rows.append(ScanRow(k, lex[k], best, tuple(int(v) for v in np.flatnonzero(best_member))))
    return rows
