from math import factorial

import numpy as np
import pytest

from snf import family as fs
from snf import perm as P
from snf import projection as pj
from snf.errors import CapacityError


def _lstsq_u1(F):
    """Independent oracle: least squares over the n^2 coset indicators."""
    n = F.n
    perms = P.all_perms(n)
    B = np.stack([(perms[:, i] == j) for i in range(n) for j in range(n)], axis=1).astype(float)
    f = fs.signed_indicator(F).values
    coef, *_ = np.linalg.lstsq(B, f, rcond=None)
    return B @ coef


@pytest.mark.parametrize("n", [3, 4, 5])
def test_f1_matches_least_squares(rng, n):
    for _ in range(5):
        F = fs.random_family(n, int(rng.integers(1, factorial(n))), rng)
        M = pj.coefficient_matrix(F)
        assert np.max(np.abs(pj.f1_function(M).values - _lstsq_u1(F))) < 1e-10


def test_dictatorship_coefficients_closed_form():
    # row dictatorship of measure 1/2 at n = 4: line entries +-3/4, others -+1/4
    M = pj.coefficient_matrix(fs.dictatorship(4, fs.ROW, 0, [0, 1]))
    assert M.epsilon == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(M.a[0], [0.75, 0.75, -0.75, -0.75])
    assert np.allclose(M.a[1:], np.tile([-0.25, -0.25, 0.25, 0.25], (3, 1)))


def test_identities_on_random_families(rng):
    for n in (4, 5, 6):
        F = fs.random_family(n, int(rng.integers(1, factorial(n))), rng)
        rep = pj.verify_identities(pj.coefficient_matrix(F))
        assert rep.max_violation() < 1e-9


def test_tau_roundtrip(rng):
    F = fs.random_family(5, 40, rng)
    M = pj.coefficient_matrix(F)
    assert np.allclose(pj.tau_from_a(M).tau, pj.tau_matrix(F).tau, atol=1e-12)


def test_gamma_values():
    assert pj.gamma(0.25) == 0.5
    assert pj.gamma(0.75) == 0.5
    assert pj.gamma(0.5) is None


def test_monte_carlo_epsilon_on_symbolic_family(rng):
    n = 10
    F = fs.BooleanFamily.symbolic(n, fs.ROW, 0, [0, 1, 2, 3, 4])
    eps, kind, se = pj.distance_to_u1(F, samples=20000, rng=rng)
    assert kind == pj.MONTE_CARLO
    assert eps == pytest.approx(0.0, abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-12)


def test_monte_carlo_epsilon_unbiased(rng):
    F = fs.random_family(7, 2520, rng)
    exact = pj.distance_to_u1(F)[0]
    G = fs.BooleanFamily.symbolic(7, fs.ROW, 0, [0, 1, 2])
    assert pj.distance_to_u1(G)[0] == pytest.approx(0.0, abs=1e-12)
    assert exact > 0.5


def test_project_ut_and_degree(rng):
    n = 4
    F = fs.random_family(n, 12, rng)
    f = fs.signed_indicator(F)
    M = pj.coefficient_matrix(F)
    assert np.max(np.abs(pj.project_ut(f, 1).values - pj.f1_function(M).values)) < 1e-8
    assert pj.degree(fs.constant(n)) == 0
    assert pj.degree(fs.coset_indicator(n, [0], [2])) == 1
    assert pj.degree(fs.coset_indicator(n, [0, 1], [2, 3])) == 2
    assert pj.degree(fs.sign_function(n)) == pj.DEGREE_ABOVE_2


def test_projection_caps():
    with pytest.raises(CapacityError):
        pj.project_ut(fs.constant(8), 2)
    with pytest.raises(CapacityError):
        pj.project_ut(fs.constant(4), 3)
