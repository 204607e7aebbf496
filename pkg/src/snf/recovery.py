"""Dictatorship reconstruction and the experiments built on it.

:func:`recover` runs the full chain: coefficient matrix and eps, large-entry
classification, strong-line detection (direct scan, with the recursive
search as a cross-check), then selection of the cosets on the strong line
whose density tau is close to 1.
"""
import math
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from snf import family as fs
from snf import kernels
from snf import perm as P
from snf import projection as pj
from snf import strong_line as sl
from snf.errors import CapacityError, PipelineError, ValidationError
from snf.restrictions import TOL_FLOOR, stream

ZERO_ONE = "ZeroOne"
GAMMA = "Gamma"
MIXED = "Mixed-violation"

DEFAULT_P_MAX = 0.5
"""Largest non-large fraction accepted for the detected line."""


def _root7(eps):
    return max(float(eps), 0.0) ** (1.0 / 7.0)


def default_tau_threshold(c, epsilon):
    """Distance from 1 within which a coset density counts as full.

    26 eps^(1/7) when c = 1/2 and 51 eps^(1/7) otherwise, capped at 1/2 so
    that at finite n the rule never accepts cosets that are mostly empty.
    """
    const = 26.0 if c == 0.5 else 51.0
    return max(min(const * _root7(epsilon), 0.5), TOL_FLOOR)


@dataclass(frozen=True)
class MediumValueReport:
    gamma: float
    gamma_far: bool
    cluster: str
    near_gamma: int
    total: int


def medium_value_check(tau_line, c, epsilon, tolerance=None):
    """Classify the densities on the strong line into the {0, 1} cluster or
    the medium value gamma.

    ``tolerance`` defaults to 26 eps^(1/7), capped at half the distance
    from gamma to {0, 1}. At c = 1/2 gamma does not exist and the cluster is
    always {0, 1}.
    """
    g = pj.gamma(c)
    tau_line = np.asarray(tau_line, dtype=np.float64)
    if g is None:
        return MediumValueReport(float("nan"), False, ZERO_ONE, 0, len(tau_line))
    root = _root7(epsilon)
    sep = min(g, 1.0 - g)
    far = sep > 156.0 * root
    if tolerance is None:
        tolerance = min(26.0 * root, sep / 2.0)
    tolerance = max(tolerance, TOL_FLOOR)
    near = np.abs(tau_line - g) <= tolerance
    k = int(near.sum())
    if k == 0:
        cluster = ZERO_ONE
    elif k == len(tau_line):
        cluster = GAMMA
    else:
        cluster = MIXED
    return MediumValueReport(float(g), bool(far), cluster, k, len(tau_line))


def select_cosets(tau_line, c, epsilon, tau_threshold=None):
    """Indices j with tau_line[j] >= 1 - threshold.

    Raises :class:`PipelineError` when the densities sit at the medium value
    gamma instead of near {0, 1}.
    """
    if tau_threshold is None:
        tau_threshold = default_tau_threshold(c, epsilon)
    med = medium_value_check(tau_line, c, epsilon)
    if med.cluster == GAMMA:
        raise PipelineError(
            "line densities cluster at the medium value",
            {"gamma": med.gamma, "tau_line": [float(t) for t in tau_line]},
        )
    S = [j for j, t in enumerate(tau_line) if t >= 1.0 - tau_threshold]
    return S, med, tau_threshold


def symdiff_size(F, G):
    """|F symmetric-difference G| as an exact integer."""
    if F.n != G.n:
        raise ValidationError("families live on different S_n")
    if F.is_explicit or G.is_explicit:
        if F.n > P.MAX_DENSE_N:
            raise CapacityError("explicit symmetric difference needs n <= 9")
        return int((fs.materialize(F).member != fs.materialize(G).member).sum())
    if G.added or G.removed:
        F, G = G, F
    if G.added or G.removed:
        if F.n > P.MAX_DENSE_N:
            raise CapacityError("two perturbed symbolic families need n <= 9")
        return int((fs.materialize(F).member != fs.materialize(G).member).sum())
    inter = sum(fs._pair_overlap(F.n, a, b) for a in F.coset_pairs() for b in G.coset_pairs())
    for r in F.added:
        inter += P.unrank(r, F.n) in G
    for r in F.removed:
        inter -= P.unrank(r, F.n) in G
    return F.size + G.size - 2 * inter


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    G: fs.BooleanFamily
    d: float
    symdiff_fraction: float
    strong_line: sl.StrongLineReport
    epsilon: float
    epsilon_kind: str
    c: float
    large_threshold: float
    tau_threshold: float
    tau_line: tuple
    cross_check: dict = field(default_factory=dict)
    medium: MediumValueReport = None

    def to_dict(self):
        return {
            "G": {
                "n": self.G.n,
                "line": self.G.line,
                "index": self.G.index + 1,
                "cosets": sorted(j + 1 for j in self.G.cosets),
            },
            "d": self.d,
            "symdiff_fraction": self.symdiff_fraction,
            "epsilon": self.epsilon,
            "epsilon_kind": self.epsilon_kind,
            "c": self.c,
            "large_threshold": self.large_threshold,
            "tau_threshold": self.tau_threshold,
            "tau_line": list(self.tau_line),
            "strong_line": {**self.strong_line.to_dict(), "index": self.strong_line.index + 1},
            "cross_check": self.cross_check,
            "medium_value": None if self.medium is None else {
                "gamma": self.medium.gamma,
                "gamma_far": self.medium.gamma_far,
                "cluster": self.medium.cluster,
            },
        }


def recover(F, tau_threshold=None, large_threshold=None, finite_n=True, p_max=DEFAULT_P_MAX,
            samples=10**6, rng=None, cross_check=True):
    """Nearest single-line coset union to ``F``.

    ``finite_n`` selects the finite-n large-entry targets (see
    :meth:`LargenessClassifier.from_matrix`); set it to False for the
    asymptotic targets {2c, 2(1 - c)}.
    """
    if rng is None:
        rng = stream(0)
    M = pj.coefficient_matrix(F, samples=samples, rng=rng)
    cls = sl.LargenessClassifier.from_matrix(M, threshold=large_threshold, finite_n=finite_n)
    L = sl.classify(M, cls)
    q, _ = sl.measure_q(L, rng=rng)
    direct = sl.find_strong_line_direct(L, p_max, q_good=q)
    if direct is None:
        kind, idx, p = sl._best_line(L)
        raise PipelineError(
            "no strong line found",
            {"best_line": [kind, idx + 1], "non_large_fraction": p, "q": q,
             "epsilon": M.epsilon, "large_threshold": cls.threshold},
        )
    check = {"performed": False}
    if cross_check and q < sl.Q_LIMIT:
        q_arg = (q + sl.Q_LIMIT) / 2.0
        try:
            rec = sl.find_strong_line_recursive(L, q_arg, rng)
            check = {"performed": True, "q": q_arg, "line": [rec.kind, rec.index + 1],
                     "degraded": rec.degraded, "agrees": rec.line == direct.line}
        except PipelineError as exc:
            check = {"performed": True, "q": q_arg, "error": str(exc), "agrees": False}
    tau = pj.tau_matrix(F).tau
    tau_line = tau[direct.index, :] if direct.kind == fs.ROW else tau[:, direct.index]
    S, med, thr = select_cosets(tau_line, M.c, M.epsilon, tau_threshold)
    G = fs.dictatorship(F.n, direct.kind, direct.index, S)
    sd = symdiff_size(F, G) / factorial(F.n)
    return RecoveryResult(
        G=G, d=len(S) / F.n, symdiff_fraction=sd, strong_line=direct, epsilon=M.epsilon,
        epsilon_kind=M.epsilon_kind, c=M.c, large_threshold=cls.threshold, tau_threshold=thr,
        tau_line=tuple(float(t) for t in tau_line), cross_check=check, medium=med,
    )


def reasonable(M, L, line, j, rng=None, samples=20000):
    """Whether the entry at position ``j`` of the strong ``line`` is reasonable.

    Reasonable means: the entry is large; r(j), the probability that a random
    diagonal through it has no other large entry, is at least 4/5; and f_1
    restricted to the coset through the entry is (1/5, eps^(1/7))-almost
    Boolean. Column lines are handled by transposing.
    """
    kind, i = line
    A = np.asarray(M.a)
    L = np.asarray(L, dtype=bool)
    if kind == fs.COLUMN:
        A, L = A.T, L.T
    if not L[i, j]:
        return False
    n = M.n
    S = ~np.delete(np.delete(L, i, axis=0), j, axis=1)
    if n <= 15:
        r = kernels.permanent(S.astype(np.float64)) / factorial(n - 1)
    else:
        perms = P.random_perms(n - 1, samples, rng)
        r = float(np.all(S[np.arange(n - 1), perms], axis=1).mean())
    if r < 0.8:
        return False
    sub = np.delete(np.delete(A, i, axis=0), j, axis=1)
    if n - 1 <= P.MAX_DENSE_N:
        perms = P.all_perms(n - 1)
    else:
        perms = P.random_perms(n - 1, samples, rng)
    g = A[i, j] + sub[np.arange(n - 1), perms].sum(axis=1)
    tol = max(_root7(M.epsilon), TOL_FLOOR)
    return float(np.mean(np.abs(np.abs(g) - 1.0) > tol)) <= 0.2


def reasonable_fraction(M, L, line, rng=None):
    """Fraction of positions on ``line`` that are not reasonable."""
    return sum(not reasonable(M, L, line, j, rng) for j in range(M.n)) / M.n


# -- experiments -------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSpec:
    n: int
    line: str
    index: int
    cosets: tuple
    delta: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValidationError("delta must lie in [0, 1]")

    @property
    def base(self):
        return fs.dictatorship(self.n, self.line, self.index, self.cosets)


def noisy_dictatorship(spec, rng):
    """Flip each permutation with probability delta, then restore the size.

    After flipping, random members are removed (or random non-members added)
    until |F| equals the size of the base dictatorship.
    """
    base = fs.materialize(spec.base).member
    target = int(base.sum())
    flips = rng.random(len(base)) < spec.delta
    member = base ^ flips
    size = int(member.sum())
    if size > target:
        idx = np.flatnonzero(member)
        member[rng.choice(idx, size=size - target, replace=False)] = False
    elif size < target:
        idx = np.flatnonzero(~member)
        member[rng.choice(idx, size=target - size, replace=False)] = True
    return fs.BooleanFamily.explicit(member)


def _ceil_tol(x):
    r = round(x)
    return int(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else math.ceil(x)


def inject_error(F, upsilon, rng):
    """Family H close to F whose distance to U_1 is certified to be >= upsilon.

    For |F| >= n!/2, either F already satisfies <f, sgn>^2 >= upsilon, or
    ceil(sqrt(upsilon) n!) members of F's majority parity (even on ties) are
    removed. Smaller families are handled through the complement. The
    certificate is <h, sgn>^2 >= upsilon, which bounds the distance because
    sgn is orthogonal to U_1.
    """
    if not 0.0 <= upsilon <= 1.0 / 16.0:
        raise ValidationError("upsilon must lie in [0, 1/16]")
    if not F.is_explicit:
        raise ValidationError("inject_error needs an explicit family")
    if upsilon == 0:
        return F
    N = len(F.member)
    if 2 * F.size < N:
        return fs.complement(inject_error(fs.complement(F), upsilon, rng))
    if fs.sign_correlation(fs.signed_indicator(F)) ** 2 >= upsilon:
        return F
    signs = P.all_signs(F.n)
    even = F.member & (signs > 0)
    odd = F.member & (signs < 0)
    pool = even if even.sum() >= odd.sum() else odd
    k = _ceil_tol(math.sqrt(upsilon) * N)
    member = F.member.copy()
    member[rng.choice(np.flatnonzero(pool), size=k, replace=False)] = False
    H = fs.BooleanFamily.explicit(member)
    if fs.sign_correlation(fs.signed_indicator(H)) ** 2 < upsilon:
        raise PipelineError("error injection failed to certify", {"upsilon": upsilon})
    return H


STABILITY_COLUMNS = ("trial", "delta", "epsilon", "symdiff", "truth_symdiff", "d", "c", "eta",
                     "ratio", "recovered")


def stability_experiment(spec, trials, **recover_kwargs):
    """One row per trial; trial t draws from the stream (spec.seed, t).

    ``symdiff`` is |F delta G|/n!, ``truth_symdiff`` compares G with the
    unperturbed dictatorship, and ratio = symdiff eta / (eps^(1/7) + n^(-1/3)).
    Failed recoveries give NaN columns and ``recovered = False``.
    """
    if spec.n > P.MAX_DENSE_N:
        raise CapacityError("stability experiments need n <= 9")
    base = spec.base
    N = factorial(spec.n)
    rows = []
    for t in range(trials):
        rng = stream(spec.seed, t)
        F = noisy_dictatorship(spec, rng)
        c, eta = F.c, F.eta
        try:
            res = recover(F, rng=rng, **recover_kwargs)
        except PipelineError:
            eps = pj.distance_to_u1(F)[0]
            rows.append({"trial": t, "delta": spec.delta, "epsilon": eps, "symdiff": float("nan"),
                         "truth_symdiff": float("nan"), "d": float("nan"), "c": c, "eta": eta,
                         "ratio": float("nan"), "recovered": False})
            continue
        eps = res.epsilon
        truth = symdiff_size(res.G, base) / N
        ratio = res.symdiff_fraction * eta / (_root7(eps) + spec.n ** (-1.0 / 3.0))
        rows.append({"trial": t, "delta": spec.delta, "epsilon": eps,
                     "symdiff": res.symdiff_fraction, "truth_symdiff": truth, "d": res.d,
                     "c": c, "eta": eta, "ratio": ratio, "recovered": truth == 0.0})
    return rows
