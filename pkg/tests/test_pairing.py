import math

import numpy as np
import pytest

from deformed_abelian.pairing import (
    DeformedPeriods,
    DivergenceError,
    bilinear_normalization,
    default_delta,
    intersection_quadrature,
    intersection_residues,
    max_delta,
)
from deformed_abelian.sympoly import Params, Poly, exact_form, regularization_split, split_kernel_shift

A = lambda k: Poly.monomial(k, "A")
a = lambda m: Poly.monomial(m, "a")


@pytest.fixture(scope="module")
def eng2():
    return DeformedPeriods(Params(xi=2.0, n=2, beta=(-1.0, -0.3, 0.4, 1.2)))


@pytest.fixture(scope="module")
def eng_small_xi():
    return DeformedPeriods(Params(xi=1.1, n=2, beta=(-0.8, -0.1, 0.5, 1.1)))


def rel(x, y, scale):
    return abs(x - y) / scale


# -- delta window ---------------------------------------------------------------


@pytest.mark.parametrize("xi,expected", [(2.0, 4 - math.pi), (1.1, 3.3 - math.pi), (5.0, 5 - math.pi), (0.5, 3.5 - math.pi)])
def test_max_delta(xi, expected):
    assert max_delta(xi) == pytest.approx(min(expected, math.pi))
    assert default_delta(xi) == pytest.approx(max_delta(xi) / 2)


def test_delta_out_of_window(eng2):
    with pytest.raises(ValueError, match="delta"):
        DeformedPeriods(eng2.params, delta=max_delta(2.0) * 1.01)


def test_phi_xi_mismatch(eng2):
    with pytest.raises(ValueError):
        DeformedPeriods(Params(xi=3.0, n=2, beta=(0, 1, 2, 3)), phi=eng2.phi)


# -- direct pairing ---------------------------------------------------------------


def test_linearity(eng2):
    Q1, Q2 = Poly((1.0, -0.5), "a"), Poly((0.2, 0.7), "a")
    L = Poly((0.0, 1.0, 0.3, -2.0), "A")
    lhs = eng2.pair(2.0 * Q1 + Q2, L)
    rhs = 2.0 * eng2.pair(Q1, L).value + eng2.pair(Q2, L).value
    assert rel(lhs.value, rhs, lhs.scale) < 1e-12


def test_zero_pairs_to_zero(eng2):
    assert eng2.pair(Poly.zero("a"), A(1)).value == 0


def test_error_estimate_is_small(eng2):
    r = eng2.pair(a(1), A(3))
    assert r.abs_error <= 1e-9 * r.scale


def test_divergent_L_degree(eng2):
    with pytest.raises(DivergenceError):
        eng2.pair(a(0), A(4))


def test_divergent_Q_degree(eng2):
    with pytest.raises(DivergenceError):
        eng2.pair(a(3), A(0))


def test_wrong_variable(eng2):
    with pytest.raises(ValueError):
        eng2.pair(A(0), A(1))


def test_n1_constant_pairing_is_finite():
    eng = DeformedPeriods(Params(xi=2.0, n=1, beta=(0.0, 1.0)))
    r = eng.pair(a(0), A(1))
    assert math.isfinite(abs(r.value)) and abs(r.value) > 0


# -- regularised pairing -----------------------------------------------------------


@pytest.mark.parametrize("m,k", [(0, 0), (0, 3), (1, 1), (1, 2)])
def test_regularized_matches_direct(eng2, m, k):
    d = eng2.pair(a(m), A(k))
    r = eng2.pair_regularized(a(m), A(k))
    assert rel(d.value, r.value, d.scale) < 1e-8


def test_regularized_matches_direct_small_xi(eng_small_xi):
    d = eng_small_xi.pair(a(1), A(2))
    r = eng_small_xi.pair_regularized(a(1), A(2))
    assert rel(d.value, r.value, d.scale) < 1e-7


@pytest.mark.parametrize("xi", [1.1, 2.0, 5.0])
def test_delta_independence(xi):
    params = Params(xi=xi, n=2, beta=(-0.9, -0.2, 0.3, 1.0))
    Q, L = Poly((0.3, -0.7, 0.5, 1.0, -0.4), "a"), A(1) + A(3)
    vals = [DeformedPeriods(params, delta=f * max_delta(xi)).pair_regularized(Q, L) for f in (0.2, 0.4, 0.7)]
    scale = max(v.scale for v in vals)
    assert max(abs(v.value - vals[0].value) for v in vals) / scale < 1e-7


def test_ambiguity_invariance(eng2, rng):
    Q = Poly((0.3, -0.7, 0.5, 1.0, -0.4), "a")
    Q1, Q2 = regularization_split(Q, eng2.params)
    r0 = eng2.pair_regularized(Q, A(1))
    for _ in range(3):
        K = Poly(rng.normal(size=2), "a")
        r = eng2.pair_regularized(Q, A(1), split=(Q1 - split_kernel_shift(K, eng2.params), Q2 + K))
        assert rel(r0.value, r.value, r0.scale) < 1e-8


def test_invalid_split_degree(eng2):
    with pytest.raises(ValueError):
        eng2.pair_regularized(a(0), A(1), split=(a(7), Poly.zero("a")))


@pytest.mark.parametrize("xi,count", [(5.0, 4), (2.0, 8), (1.1, 12)])
def test_gamma_point_count(xi, count):
    eng = DeformedPeriods(Params(xi=xi, n=2, beta=(0.0, 0.5, 1.0, 1.5)))
    # one point per beta_j for each k = 0 .. floor(pi/xi)
    assert len(eng.gamma_points()) == 4 * (math.floor(math.pi / xi) + 1) == count


@pytest.mark.parametrize("j,k", [(0, 0), (2, 0), (1, 1)])
def test_weight_residue_vs_circle(eng2, j, k):
    analytic, circle = eng2.residue_check(j, k)
    assert abs(analytic - circle) <= 1e-8 * abs(circle)


@pytest.mark.parametrize("eng_name", ["eng2", "eng_small_xi"])
def test_exact_form_nullity(request, eng_name):
    eng = request.getfixturevalue(eng_name)
    for m in range(eng.params.n):
        for k in range(1, 2 * eng.params.n):
            r = eng.pair_regularized(exact_form(a(m), eng.params), A(k))
            assert abs(r.value) <= 1e-6 * r.scale


def test_pair_auto_dispatch(eng2):
    assert eng2.pair_auto(a(1), A(1)).method == "direct"
    assert eng2.pair_auto(a(3), A(1)).method == "regularized"


# -- intersection number -----------------------------------------------------------


def test_intersection_n1_closed_form():
    p = Params(xi=2.0, n=1, beta=(-0.4, 0.9))
    B1, B2 = p.B
    expected = 2 * math.pi / (B1 * B2 * (B1 + B2))
    assert intersection_residues(A(1), A(0), p) == pytest.approx(expected, rel=1e-14)
    assert intersection_quadrature(A(1), A(0), p) == pytest.approx(expected, rel=1e-10)


def test_intersection_random_pairs(eng2, rng):
    for _ in range(20):
        L, M = Poly(rng.normal(size=4), "A"), Poly(rng.normal(size=4), "A")
        q = eng2.intersection_quadrature(L, M)
        r = eng2.intersection_residues(L, M)
        assert abs(q - r) <= 1e-8 * abs(r)


def test_intersection_antisymmetric(eng2, rng):
    L, M = Poly(rng.normal(size=4), "A"), Poly(rng.normal(size=4), "A")
    x, y = eng2.intersection_residues(L, M), eng2.intersection_residues(M, L)
    assert abs(x + y) <= 1e-14 * abs(x)


@pytest.mark.parametrize("k,l", [(0, 2), (1, 3), (1, 1), (2, 2)])
def test_intersection_same_parity_vanishes(eng2, k, l):
    assert eng2.intersection_residues(A(k), A(l)) == 0
    assert eng2.intersection_quadrature(A(k), A(l)) == 0


def test_intersection_divergence():
    p = Params(xi=2.0, n=1, beta=(0.0, 1.0))
    with pytest.raises(DivergenceError):
        intersection_quadrature(A(3), A(2), p)


# -- bilinear identity --------------------------------------------------------------


def test_bilinear_normalization_sign():
    assert bilinear_normalization(Params(xi=2.0, n=2, beta=(0, 1, 2, 3))) == pytest.approx(-1j)
    assert bilinear_normalization(Params(xi=2.0, n=3, beta=(0, 1, 2, 3, 4, 5))) == pytest.approx(1j)


def test_bilinear_example(eng2):
    lhs, rhs, res = eng2.bilinear_form(A(1), A(2))
    assert res < 1e-6
    assert abs(lhs) > 0


def test_bilinear_small_xi(eng_small_xi, rng):
    L = Poly(np.r_[0.0, rng.normal(size=3)], "A")
    M = Poly(np.r_[0.0, rng.normal(size=3)], "A")
    assert eng_small_xi.bilinear_form(L, M)[2] < 1e-6


def test_bilinear_rejects_constant_term(eng2):
    with pytest.raises(ValueError, match="constant"):
        eng2.bilinear_form(A(0) + A(1), A(2))


def test_bilinear_rejects_n1():
    eng = DeformedPeriods(Params(xi=2.0, n=1, beta=(0.0, 1.0)))
    with pytest.raises(ValueError):
        eng.bilinear_form(A(1), A(1))
