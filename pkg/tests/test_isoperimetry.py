import itertools
from math import factorial

import numpy as np
import pytest

from snf import family as fs
from snf import isoperimetry as iso
from snf import perm as P
from snf.errors import CapacityError, PipelineError, ValidationError


def _brute_boundary(member, n):
    perms = P.all_perms(n)
    out = 0
    for r in np.flatnonzero(member):
        p = perms[r]
        for a, b in itertools.combinations(range(n), 2):
            q = np.where(p == a, b, np.where(p == b, a, p))
            out += not member[P.rank(tuple(q))]
    return out


def test_boundary_examples():
    T = fs.dictatorship(4, fs.ROW, 0, [0])
    assert iso.edge_boundary(T) == iso.edge_boundary(fs.materialize(T)) == 18
    assert iso.edge_boundary(fs.BooleanFamily.from_ranks(4, [])) == 0
    assert iso.edge_boundary(fs.BooleanFamily.from_ranks(4, range(24))) == 0


def test_boundary_brute_force(rng):
    member = rng.random(24) < 0.5
    assert iso.edge_boundary(fs.BooleanFamily.explicit(member)) == _brute_boundary(member, 4)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_symbolic_boundary_matches_explicit(n):
    for line in (fs.ROW, fs.COLUMN):
        for k in range(n + 1):
            F = fs.dictatorship(n, line, n - 1, range(k))
            assert iso.edge_boundary(F) == iso.edge_boundary(fs.materialize(F))


def test_handshake_identity_exhaustive_n4():
    table = P.neighbor_table(4)
    deg = table.shape[1]
    for mask in range(0, 1 << 24, 4099):
        member = np.array([(mask >> v) & 1 for v in range(24)], bool)
        internal = int(member[table[member]].sum()) // 2
        B = iso.edge_boundary(fs.BooleanFamily.explicit(member))
        assert 2 * internal + B == member.sum() * deg


def test_diaconis_dictatorships_n5():
    for line in (fs.ROW, fs.COLUMN):
        for idx in range(5):
            for S in ([0], [1, 3], [0, 2, 4]):
                rep = iso.diaconis_check(fs.dictatorship(5, line, idx, S))
                assert rep.slack == 0.0 and rep.equality
                assert rep.epsilon == pytest.approx(0.0, abs=1e-12) and rep.consistent


def test_diaconis_alternating_group():
    rep = iso.diaconis_check(fs.BooleanFamily.explicit(P.all_signs(5) > 0))
    assert rep.slack > 0 and not rep.equality and rep.consistent


def test_diaconis_random(rng):
    for _ in range(50):
        F = fs.random_family(5, int(rng.integers(1, 120)), rng)
        rep = iso.diaconis_check(F)
        assert rep.slack > 0 and rep.consistent


def test_iso_stability_dictatorship():
    rep = iso.iso_stability(fs.dictatorship(6, fs.ROW, 0, [0, 1]))
    assert rep.delta0 == 0.0 and rep.eps_actual == pytest.approx(0.0, abs=1e-12)
    assert rep.recovery.symdiff_fraction == 0.0


def _tightness_family(n, a, b):
    perms = P.all_perms(n)
    first = perms[:, 0] < a
    second = (perms[:, 1] >= a) & (perms[:, 1] < a + b) & ~first
    return fs.BooleanFamily.explicit(first | second)


def test_iso_stability_tightness_example():
    F = _tightness_family(8, 3, 1)
    rep = iso.iso_stability(F)
    assert rep.delta0 > 0
    assert rep.eps_actual <= rep.eps_bound + 1e-9
    assert rep.eps_signed == pytest.approx(4 * rep.eps_actual)
    # the nearest row dictatorship is T_11 u T_12 u T_13
    assert rep.recovery.G == fs.dictatorship(8, fs.ROW, 0, [0, 1, 2])
    # the extra members are T_{2,4} minus its overlap with the first row's cosets
    assert rep.recovery.symdiff_fraction == (5040 - 3 * 720) / 40320


def test_iso_stability_noisy_chain(rng):
    from snf import recovery as rc
    from snf.restrictions import stream

    spec = rc.NoiseSpec(8, fs.ROW, 1, (2, 3, 6, 7), 0.01, seed=5)
    rep = iso.iso_stability(rc.noisy_dictatorship(spec, stream(5)))
    assert rep.eps_actual <= rep.eps_bound + 1e-9
    assert rep.recovery.G == spec.base


def test_lex_segment():
    assert iso.lex_segment(4, 6).member.tolist() == (fs.materialize(fs.dictatorship(4, fs.ROW, 0, [0])).member).tolist()
    assert iso.lex_segment(4, 0).size == 0
    assert iso.lex_segment(4, 24).size == 24
    with pytest.raises(ValidationError):
        iso.lex_segment(4, 25)


def test_conjecture_exhaustive_n3():
    rows = iso.conjecture_scan(3)
    assert [r.k for r in rows] == list(range(7))
    assert not any(r.improved for r in rows)
    for r in rows:
        member = np.zeros(6, bool)
        member[list(r.witness)] = True
        assert member.sum() == r.k
        assert iso.edge_boundary(fs.BooleanFamily.explicit(member)) == r.best_boundary


def test_conjecture_exhaustive_n4():
    rows = iso.conjecture_scan(4, sizes=[6, 12])
    assert rows[0].lex_boundary == rows[0].best_boundary == 18
    assert not any(r.improved for r in rows)


def test_lex_boundaries_match_direct():
    got = iso._lex_boundaries(4)
    for k in (0, 5, 6, 13, 24):
        assert got[k] == iso.edge_boundary(iso.lex_segment(4, k))


def test_conjecture_local_search_reproducible():
    a = iso.conjecture_scan(5, sizes=[24, 30], mode=iso.LOCAL_SEARCH, restarts=4, seed=3)
    b = iso.conjecture_scan(5, sizes=[24, 30], mode=iso.LOCAL_SEARCH, restarts=4, seed=3)
    assert a == b
    for r in a:
        assert r.lex_boundary == iso.edge_boundary(iso.lex_segment(5, r.k))
        # nothing beats the isoperimetric bound
        assert r.best_boundary >= (1 - r.k / 120) * 5 * r.k


def test_conjecture_caps():
    with pytest.raises(CapacityError):
        iso.conjecture_scan(5)
    with pytest.raises(CapacityError):
        iso.conjecture_scan(9, sizes=[1], mode=iso.LOCAL_SEARCH)
    with pytest.raises(ValidationError):
        iso.conjecture_scan(3, mode="anneal")
