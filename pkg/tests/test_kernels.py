"""Both kernel backends must agree bit for bit."""
import itertools
from math import factorial

import numpy as np
import pytest

from snf import _pykernels, kernels


def test_backend_flag_names_active_module():
    assert kernels.BACKEND in kernels.available_backends()
    assert kernels.permanent is kernels.available_backends()[kernels.BACKEND].permanent


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_unrank_all_is_lexicographic(backend, n):
    perms = backend.lex_unrank_all(n)
    assert perms.tolist() == [list(p) for p in itertools.permutations(range(n))]
    assert np.array_equal(backend.lex_rank(perms), np.arange(factorial(n)))


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_neighbor_table_matches_reference(backend, n):
    assert np.array_equal(backend.neighbor_table(n), _pykernels.neighbor_table(n))


def test_neighbor_table_swaps_values():
    table = kernels.neighbor_table(4)
    perms = kernels.lex_unrank_all(4)
    pairs = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    for r in (0, 7, 23):
        for t, (a, b) in enumerate(pairs):
            q = perms[table[r, t]]
            p = perms[r]
            assert np.array_equal(np.where(p == a, b, np.where(p == b, a, p)), q)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_edge_boundary_backends_agree(backend, rng, n):
    for _ in range(5):
        member = rng.random(factorial(n)) < 0.4
        assert backend.edge_boundary(member, n) == _pykernels.edge_boundary(member, n)


def _brute_counts(L):
    m = L.shape[0]
    zero = one = 0
    for p in itertools.permutations(range(m)):
        k = int(L[np.arange(m), list(p)].sum())
        zero += k == 0
        one += k == 1
    return zero, one


@pytest.mark.parametrize("m", [1, 2, 3, 5, 7])
def test_diagonal_counts_brute_force(backend, rng, m):
    for _ in range(4):
        L = rng.random((m, m)) < 0.3
        assert tuple(backend.diagonal_large_counts(L)) == _brute_counts(L)


def test_diagonal_counts_empty_matrix(backend):
    assert tuple(backend.diagonal_large_counts(np.zeros((0, 0), bool))) == (1, 0)


def test_diagonal_counts_large_m_agree(rng):
    backs = kernels.available_backends()
    L = rng.random((13, 13)) < 0.1
    results = {tuple(b.diagonal_large_counts(L)) for b in backs.values()}
    assert len(results) == 1


def test_permanent_small_cases(backend, rng):
    assert backend.permanent(np.zeros((0, 0))) == 1.0
    assert backend.permanent(np.ones((4, 4))) == pytest.approx(24.0)
    A = rng.random((6, 6))
    brute = sum(np.prod(A[np.arange(6), list(p)]) for p in itertools.permutations(range(6)))
    assert backend.permanent(A) == pytest.approx(brute, rel=1e-12)


def test_exhaustive_scan_backends_agree():
    from snf.isoperimetry import _neighbor_masks

    masks = _neighbor_masks(3)
    outs = [b.exhaustive_boundary_scan(masks) for b in kernels.available_backends().values()]
    for best, wit in outs[1:]:
        assert np.array_equal(best, outs[0][0])
        assert np.array_equal(wit, outs[0][1])


@pytest.mark.parametrize("name,args", [
    ("lex_unrank_all", (13,)),
    ("neighbor_table", (0,)),
])
def test_kernel_caps(backend, name, args):
    with pytest.raises(ValueError):
        getattr(backend, name)(*args)
