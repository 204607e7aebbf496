import math
from math import factorial

import numpy as np
import pytest

from snf import family as fs
from snf import perm as P
from snf import projection as pj
from snf import recovery as rc
from snf import strong_line as sl
from snf.errors import PipelineError, ValidationError
from snf.restrictions import stream


def _relabel(F, pi, rho):
    """sigma -> rho o sigma o pi applied to every member."""
    perms = P.all_perms(F.n)[fs.materialize(F).member]
    return fs.BooleanFamily.from_ranks(F.n, P.rank_array(rho[perms[:, pi]]))


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_exact_dictatorship_is_fixed_point(k):
    F = fs.dictatorship(6, fs.ROW, 0, range(k))
    res = rc.recover(F)
    assert res.G == F
    assert res.symdiff_fraction == 0.0 and res.d == pytest.approx(k / 6)
    if k in (1, 5):
        # a single coset (or its complement) is also a column dictatorship:
        # L has a full row and a full column, so q = 1 and the recursive
        # cross-check is skipped
        assert not res.cross_check["performed"]
    else:
        assert res.cross_check["agrees"]


def test_column_dictatorship():
    F = fs.materialize(fs.dictatorship(6, fs.COLUMN, 4, [0, 5]))
    res = rc.recover(F)
    assert res.G.line == fs.COLUMN and res.G.index == 4 and res.G.cosets == {0, 5}
    assert res.symdiff_fraction == 0.0


def test_noised_dictatorship_n8():
    spec = rc.NoiseSpec(8, fs.ROW, 2, (0, 3, 5, 6), 0.005, seed=11)
    F = rc.noisy_dictatorship(spec, stream(11))
    res = rc.recover(F, rng=stream(11))
    assert res.G == spec.base
    assert res.symdiff_fraction <= 2 * 0.005 + 0.002


def test_random_family_fails_loudly(rng):
    F = fs.random_family(6, 360, rng)
    with pytest.raises(PipelineError) as info:
        rc.recover(F)
    assert "non_large_fraction" in info.value.diagnostics


def test_idempotent_on_output(rng):
    for seed in range(3):
        spec = rc.NoiseSpec(7, fs.COLUMN, seed, (1, 2), 0.01, seed=seed)
        G = rc.recover(rc.noisy_dictatorship(spec, stream(seed))).G
        assert rc.recover(G).G == G


@pytest.mark.parametrize("n", [5, 6])
def test_complement_equivariance(n):
    F = fs.materialize(fs.dictatorship(n, fs.ROW, 1, [0, 2]))
    a = rc.recover(F)
    b = rc.recover(fs.complement(F))
    assert b.G.line == a.G.line and b.G.index == a.G.index
    assert b.G.cosets == frozenset(range(n)) - a.G.cosets


def test_relabeling_equivariance(rng):
    n = 6
    F = fs.materialize(fs.dictatorship(n, fs.ROW, 2, [1, 4, 5]))
    base = rc.recover(F).G
    for _ in range(20):
        pi = rng.permutation(n)
        rho = rng.permutation(n)
        got = rc.recover(_relabel(F, pi, rho)).G
        inv_pi = np.argsort(pi)
        assert got.line == fs.ROW and got.index == inv_pi[base.index]
        assert got.cosets == frozenset(int(rho[j]) for j in base.cosets)


def test_symdiff_symbolic_matches_explicit():
    A = fs.dictatorship(6, fs.ROW, 0, [0, 1])
    B = fs.dictatorship(6, fs.COLUMN, 3, [2, 4, 5])
    C = fs.BooleanFamily.symbolic(6, fs.ROW, 0, [1, 2], added=[0])
    for X, Y in ((A, B), (A, C), (C, B), (A, A)):
        want = int((fs.materialize(X).member != fs.materialize(Y).member).sum())
        assert rc.symdiff_size(X, Y) == want


def _dict_L(n=6):
    M = pj.coefficient_matrix(fs.dictatorship(n, fs.ROW, 0, [0, 1, 2]))
    return M, sl.classify(M, sl.LargenessClassifier(M.epsilon, M.c, 0.3, (1.0,)))


def test_reasonable_on_dictatorship():
    M, L = _dict_L()
    assert all(rc.reasonable(M, L, (fs.ROW, 0), j) for j in range(6))
    assert rc.reasonable_fraction(M, L, (fs.ROW, 0)) == 0.0
    L2 = L.copy()
    L2[0, 4] = False
    assert not rc.reasonable(M, L2, (fs.ROW, 0), 4)


def test_reasonable_column_line():
    M, L = _dict_L()
    Mt = M.transpose()
    assert all(rc.reasonable(Mt, L.T, (fs.COLUMN, 0), j) for j in range(6))


def test_unreasonable_fraction_small_on_noise():
    spec = rc.NoiseSpec(8, fs.ROW, 0, (0, 1, 2, 3), 0.005, seed=2)
    F = rc.noisy_dictatorship(spec, stream(2))
    M = pj.coefficient_matrix(F)
    L = sl.classify(M, sl.LargenessClassifier.from_matrix(M, finite_n=True))
    frac = rc.reasonable_fraction(M, L, (fs.ROW, 0))
    assert frac <= 3 * M.epsilon ** (1 / 7)


def test_medium_value_check():
    half = rc.medium_value_check([1, 0, 1, 0], 0.5, 0.01)
    assert half.cluster == rc.ZERO_ONE and not half.gamma_far
    zo = rc.medium_value_check([0.98, 0.01, 0.02, 0.0, 0.99], 0.3, 1e-30)
    assert zo.cluster == rc.ZERO_ONE and zo.gamma == pytest.approx(0.6) and zo.gamma_far
    gam = rc.medium_value_check([0.6] * 5, 0.3, 1e-12)
    assert gam.cluster == rc.GAMMA
    assert rc.medium_value_check([0.6, 1.0], 0.3, 1e-12).cluster == rc.MIXED
    with pytest.raises(PipelineError):
        rc.select_cosets([0.6] * 5, 0.3, 1e-12)


def test_noised_c03_line_is_zero_one():
    spec = rc.NoiseSpec(9, fs.ROW, 0, (0, 1, 2), 0.002, seed=4)
    F = rc.noisy_dictatorship(spec, stream(4))
    res = rc.recover(F, rng=stream(4))
    assert res.medium.cluster == rc.ZERO_ONE
    assert res.G == spec.base


def test_inject_error_certificate(rng):
    for _ in range(10):
        F = fs.random_family(6, int(rng.integers(100, 620)), rng)
        H = rc.inject_error(F, 0.01, rng)
        assert rc.symdiff_size(F, H) <= math.sqrt(0.01) * 720 + 1e-9
        assert fs.sign_correlation(fs.signed_indicator(H)) ** 2 >= 0.01
        assert pj.distance_to_u1(H)[0] >= 0.01 - 1e-12


def test_inject_error_edge_cases(rng):
    F = fs.random_family(5, 60, rng)
    assert rc.inject_error(F, 0.0, rng) is F
    with pytest.raises(ValidationError):
        rc.inject_error(F, 0.1, rng)
    with pytest.raises(ValidationError):
        rc.inject_error(fs.dictatorship(5, fs.ROW, 0, [0]), 0.01, rng)


def test_inject_error_balanced_sign():
    # the row dictatorship of measure 1/2 is orthogonal to sgn
    F = fs.materialize(fs.dictatorship(6, fs.ROW, 0, [0, 1, 2]))
    assert fs.sign_correlation(fs.signed_indicator(F)) == pytest.approx(0.0, abs=1e-15)
    H = rc.inject_error(F, 0.01, stream(0))
    assert rc.symdiff_size(F, H) == 72
    assert np.all(H.member <= F.member)


def test_stability_experiment_zero_noise():
    spec = rc.NoiseSpec(6, fs.ROW, 0, (0, 1, 2), 0.0, seed=1)
    rows = rc.stability_experiment(spec, 2)
    for r in rows:
        assert r["epsilon"] == pytest.approx(0.0, abs=1e-12)
        assert r["symdiff"] == 0.0 and r["recovered"]


def test_stability_experiment_deterministic():
    spec = rc.NoiseSpec(7, fs.ROW, 0, (0, 1, 2), 0.01, seed=9)
    a = rc.stability_experiment(spec, 3)
    b = rc.stability_experiment(spec, 3)
    assert a == b
    assert all(set(r) == set(rc.STABILITY_COLUMNS) for r in a)


def test_delta_sweep_ratios_finite():
    for delta in (0.001, 0.005, 0.01, 0.05):
        spec = rc.NoiseSpec(8, fs.ROW, 0, (0, 1, 2, 3), delta, seed=3)
        for r in rc.stability_experiment(spec, 2):
            assert r["recovered"] is False or math.isfinite(r["ratio"])


def test_noise_spec_validation():
    with pytest.raises(ValidationError):
        rc.NoiseSpec(6, fs.ROW, 0, (0,), 1.5)
    F = rc.noisy_dictatorship(rc.NoiseSpec(6, fs.ROW, 0, (0, 1), 0.2), stream(0))
    assert F.size == 2 * factorial(5)
