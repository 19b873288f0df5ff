import json
import math

import numpy as np
import pytest

from deformed_abelian.identities import (
    CHECK_NAMES,
    ClassicalCurve,
    check_suite,
    classical_cycle_sum,
    classical_limit_scan,
    classical_period,
    classical_zeta,
    cycle_boundary_term,
    cycle_relation,
    elliptic_period_agm,
)
from deformed_abelian.pairing import DeformedPeriods
from deformed_abelian.quad import QuadratureSpec
from deformed_abelian.sympoly import Params, Poly, basis_R, basis_S

from conftest import random_beta


# -- classical side ---------------------------------------------------------------


def test_curve_validation():
    with pytest.raises(ValueError):
        ClassicalCurve((1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        ClassicalCurve((1.0, 3.0, 2.0, 4.0))
    assert ClassicalCurve((0, 1, 2, 3)).genus == 1


def test_agm_oracle():
    curve = ClassicalCurve((0.0, 1.0, 2.0, 3.0))
    assert classical_period(0, 1, curve) == pytest.approx(elliptic_period_agm(curve.branch_points), rel=1e-12)
    assert classical_period(0, 1, curve) == pytest.approx(3.3715007096, rel=1e-10)


def test_agm_oracle_asymmetric():
    b = (1.0, 2.0, 3.0, 4.0)
    assert classical_period(0, 1, ClassicalCurve(b)) == pytest.approx(elliptic_period_agm(b), rel=1e-12)


def test_symmetric_odd_period_vanishes():
    # symmetric roots: a / sqrt|P| is odd about the middle of the central segment
    curve = ClassicalCurve((-2.0, -1.0, 1.0, 2.0))
    assert abs(classical_period(1, 2, curve)) < 1e-13


def test_period_self_convergence():
    curve = ClassicalCurve((1.0, 2.0, 3.0, 4.0, 6.0, 7.0))
    a = classical_period(2, 3, curve)
    b = classical_period(2, 3, curve, QuadratureSpec(target_rel_err=1e-15, nodes_per_panel=16))
    assert a == pytest.approx(b, rel=1e-12)


def test_period_index_checks():
    curve = ClassicalCurve((0.0, 1.0, 2.0, 3.0))
    with pytest.raises(ValueError):
        classical_period(0, 4, curve)
    with pytest.raises(ValueError):
        classical_period(-1, 1, curve)


@pytest.mark.parametrize("b", [(1.0, 2.0, 3.0, 4.0), (0.5, 1.0, 2.5, 3.0, 4.5, 7.0)])
def test_classical_cycle_sum_first_and_second_kind(b):
    curve = ClassicalCurve(b)
    for p in range(curve.n - 1):
        total, scale = classical_cycle_sum(Poly.monomial(p, "a"), curve)
        assert abs(total) <= 1e-11 * scale
    for p in range(1, curve.n):
        total, scale = classical_cycle_sum(classical_zeta(p, curve), curve)
        assert abs(total) <= 1e-11 * scale


def test_classical_cycle_sum_third_kind():
    curve = ClassicalCurve((0.5, 1.0, 2.5, 3.0, 4.5, 7.0))
    total, _ = classical_cycle_sum(Poly.monomial(2, "a"), curve)
    assert total.real == pytest.approx(-2 * math.pi, rel=1e-11)


def test_classical_zeta_coefficients():
    # p = 1, n = 2: 1/2 * 0 * b-stuff + sum_{k>=2} (-1)^k (k - 1) sigma_{4-k} a^{k-1}
    Z = classical_zeta(1, ClassicalCurve((1.0, 2.0, 3.0, 4.0))).coeffs
    assert np.allclose(Z, [0.0, -10.0, 2.0])


def test_scan_trivial_ratios():
    rows = classical_limit_scan((1.0, 2.0, 3.0, 4.0), [10.0, 20.0], p=0, p_alt=0, k=1, k_alt=1)
    for row in rows:
        assert row.dev1 < 1e-14 and row.dev2 < 1e-14


def test_scan_requires_increasing_xi():
    with pytest.raises(ValueError):
        classical_limit_scan((1.0, 2.0, 3.0, 4.0), [20.0, 10.0])


def test_scan_rejects_nonpositive_branch_points():
    with pytest.raises(ValueError):
        classical_limit_scan((-1.0, 2.0, 3.0, 4.0), [10.0])


# -- cycle relation -----------------------------------------------------------------


@pytest.mark.parametrize("n,xi", [(1, 2.0), (2, 2.0), (2, 1.1), (3, 5.0)])
def test_boundary_term_closed_form(n, xi):
    params = Params(xi=xi, n=n, beta=tuple(np.linspace(-0.9, 1.1, 2 * n)))
    eng = DeformedPeriods(params)
    value, err = cycle_boundary_term(Poly.monomial(n - 1, "a"), eng)
    expected = 0.5 * xi * 1j ** (2 - n)
    assert abs(value - expected) <= 1e-9 * abs(expected)
    assert err < 1e-9


def test_boundary_term_zero_below_top_degree():
    eng = DeformedPeriods(Params(xi=2.0, n=2, beta=(-1.0, -0.3, 0.4, 1.2)))
    assert cycle_boundary_term(Poly.monomial(0, "a"), eng) == (0j, 0.0)
    with pytest.raises(ValueError):
        cycle_boundary_term(Poly.monomial(2, "a"), eng)


def test_cycle_relation_random_configs(rng):
    for _ in range(2):
        params = Params(xi=2.0, n=2, beta=random_beta(rng, 2))
        eng = DeformedPeriods(params)
        for Q in (basis_R(1, params), basis_S(1, params), Poly.monomial(1, "a")):
            total, boundary, scale = cycle_relation(Q, eng)
            assert abs(total - boundary) <= 1e-6 * scale


# -- check suite ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def default_report():
    return check_suite(Params(xi=2.0, n=2, beta=(-1.0, -0.3, 0.4, 1.2)), seed=3)


def test_suite_default_passes(default_report):
    assert default_report.passed
    assert [r.name for r in default_report.records] == list(CHECK_NAMES)


def test_suite_verdict_consistency(default_report):
    for r in default_report.records:
        assert (r.verdict == "pass") == (r.residual <= r.tolerance)
        assert r.wall_time >= 0


def test_suite_report_serialises(default_report):
    d = json.loads(json.dumps(default_report.to_dict()))
    assert d["passed"] is True and d["seed"] == 3 and len(d["checks"]) == len(CHECK_NAMES)


def test_suite_n1_skips_basis_checks():
    rep = check_suite(Params(xi=2.0, n=1, beta=(-0.3, 0.6)))
    skipped = {r.name for r in rep.records if r.verdict == "skipped"}
    assert skipped == {"kernel_identity", "bilinear_identity", "s_zeta_limit"}
    assert rep.passed


def test_suite_only_and_tolerance_override():
    params = Params(xi=2.0, n=2, beta=(-1.0, -0.3, 0.4, 1.2))
    rep = check_suite(params, {"phi_evenness": 0.0}, only=["phi_evenness", "kernel_identity"])
    assert [r.name for r in rep.records] == ["phi_evenness", "kernel_identity"]
    assert rep.records[1].verdict == "pass"


def test_suite_unknown_names():
    params = Params(xi=2.0, n=1, beta=(0.0, 1.0))
    with pytest.raises(ValueError):
        check_suite(params, only=["nope"])
    with pytest.raises(ValueError):
        check_suite(params, {"nope": 1.0})


def test_suite_is_deterministic_per_seed():
    params = Params(xi=2.0, n=2, beta=(-1.0, -0.3, 0.4, 1.2))
    r1 = check_suite(params, seed=5, only=["kernel_identity", "intersection_quadrature_vs_residue"])
    r2 = check_suite(params, seed=5, only=["kernel_identity", "intersection_quadrature_vs_residue"])
    assert [r.residual for r in r1.records] == [r.residual for r in r2.records]


@pytest.mark.slow
def test_suite_n3_small_xi():
    rep = check_suite(Params(xi=1.1, n=3, beta=(-1.0, -0.5, 0.0, 0.4, 0.9, 1.5)))
    assert rep.passed, [r for r in rep.records if r.verdict == "fail"]
