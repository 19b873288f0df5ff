import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deformed_abelian.phi import BaseStripError, PhiEvaluator, PoleProximityError, phi_tail_exponent


@pytest.fixture(scope="module")
def phi2():
    return PhiEvaluator(2.0)


def eq1_residual(phi, z):
    xi = phi.xi
    return abs(phi.phi(z + 1j * math.pi) * phi.phi(z) * 4 * cmath.sinh(math.pi / xi * (z + 0.5j * math.pi))
               * cmath.cosh(z) - 1)


def test_phi_at_zero_is_C(phi2):
    assert phi2.phi(0.0, path="base") == pytest.approx(phi2.C, rel=1e-14)
    assert phi2.phi(0.0, path="product") == pytest.approx(phi2.C, rel=1e-14)


def test_C_phase_is_quarter_pi(phi2):
    # the relation fixes C^2 on the positive imaginary axis
    c2 = phi2.C ** 2
    assert abs(c2.real) < 1e-12 * abs(c2) and c2.imag > 0
    assert math.isclose(cmath.phase(phi2.C), math.pi / 4, rel_tol=1e-12)


@pytest.mark.parametrize("xi", [0.7, 2.0, 5.0])
def test_C_finite_and_probe_independent(xi):
    phi = PhiEvaluator(xi)
    assert math.isfinite(abs(phi.C)) and abs(phi.C) > 0
    assert abs(phi.compute_constant((0.3,)) / phi.compute_constant((1.1,)) - 1) < 1e-8


def test_evenness_base(phi2):
    assert phi2.phi_base(1.0) == pytest.approx(phi2.phi_base(-1.0), rel=1e-13)


def test_base_vs_product_point(phi2):
    z = 0.7 + 0.3j
    assert abs(phi2.phi_base(z) / phi2.phi_product(z) - 1) < 1e-9


def test_base_vs_product_xi3():
    phi = PhiEvaluator(3.0)
    assert abs(phi.phi_base(0.5) / phi.phi_product(0.5) - 1) < 1e-9


def test_base_strip_rejected(phi2):
    with pytest.raises(BaseStripError):
        phi2.phi_base(1.0 + 1.4j)


def test_pole_proximity(phi2):
    with pytest.raises(PoleProximityError):
        phi2.phi(0.5j * math.pi)
    with pytest.raises(PoleProximityError):
        phi2.phi(-1j * (0.5 * math.pi + 2.0 + 2 * math.pi))


def test_simple_pole_growth(phi2):
    p = 0.5 * math.pi + phi2.xi
    v1 = abs(phi2.phi(1j * p * (1 + 1e-3)))
    v2 = abs(phi2.phi(1j * p * (1 + 1e-4)))
    assert v2 / v1 == pytest.approx(10.0, rel=2e-3)


def test_eq1_example(phi2):
    assert eq1_residual(phi2, 0.4) < 1e-10


def test_eq2_shift_2pi_example():
    phi = PhiEvaluator(2.5)
    a, xi = -0.3, 2.5
    ratio = phi.phi(a + 2j * math.pi) / phi.phi(a)
    expected = -cmath.sinh(math.pi / xi * (a + 0.5j * math.pi)) / cmath.sinh(math.pi / xi * (a + 1.5j * math.pi))
    assert abs(ratio / expected - 1) < 1e-10


def test_eq2_shift_xi_example():
    phi = PhiEvaluator(1.1)
    a, xi = 0.2, 1.1
    ratio = phi.phi(a + 1j * xi) / phi.phi(a)
    expected = cmath.cosh(0.5 * (a - 0.5j * math.pi)) / cmath.cosh(0.5 * (a + 0.5j * math.pi + 1j * xi))
    assert abs(ratio / expected - 1) < 1e-10


def test_shift_path_agrees(phi2):
    for z in (0.3 + 2.5j, -1.0 + 4.0j, 0.8 - 3.3j):
        assert abs(phi2.phi(z, path="shift") / phi2.phi(z, path="product") - 1) < 1e-10


def test_decay_law(phi2):
    vals = [math.log(abs(phi2.phi(x))) + phi2.kappa * x for x in np.linspace(10, 30, 9)]
    assert max(vals) - min(vals) < 1e-3
    assert phi2.kappa == phi_tail_exponent(2.0)


def test_phi_tilde_at_origin(phi2):
    assert phi2.phi_tilde(0.0, 0.0) == pytest.approx(phi2.C, rel=1e-14)


def test_phi_tilde_asymptotics(phi2):
    beta = 0.7
    right = [abs(phi2.phi_tilde(x, beta)) * math.exp((math.pi / 2 + 1) * x) for x in (20.0, 30.0)]
    assert abs(right[0] / right[1] - 1) < 1e-3
    left = [phi2.phi_tilde(x, beta) for x in (-30.0, -40.0)]
    assert abs(left[0] / left[1] - 1) < 1e-6


def test_log_phi_tilde_is_log(phi2):
    z, beta = 0.4 - 0.2j, -0.5
    assert cmath.exp(phi2.log_phi_tilde(z, beta)) == pytest.approx(phi2.phi_tilde(z, beta), rel=1e-13)


def test_residue_symmetry(phi2):
    assert phi2.phi_residue(0, 0, 1) == pytest.approx(-phi2.phi_residue(0, 0, -1), rel=1e-14)


@pytest.mark.parametrize("m,l", [(0, 0), (1, 0), (2, 0), (0, 1)])
def test_residue_circle_check(phi2, m, l):
    phi2.phi_residue(m, l, 1, check=True)
    phi2.phi_residue(m, l, -1, check=True)


@pytest.mark.parametrize("xi", [0.7, 2.0, 5.0])
def test_first_residue_squared(xi):
    # phi(alpha + pi i) phi(alpha) near alpha = -i pi/2 pairs the poles at -+ i pi/2
    # against the double zero of sh * ch, giving Res^2 = -i xi / (4 pi)
    res = PhiEvaluator(xi).phi_residue(0)
    assert res ** 2 == pytest.approx(-1j * xi / (4 * math.pi), rel=1e-10)


def test_residue_index_range(phi2):
    with pytest.raises(ValueError):
        phi2.phi_residue(0, 10 ** 6)
    with pytest.raises(ValueError):
        phi2.phi_residue(0, 0, 2)


def test_resonance_warning():
    with pytest.warns(RuntimeWarning):
        PhiEvaluator(math.pi / 1.5 + 1e-9)


def test_invalid_xi():
    with pytest.raises(ValueError):
        PhiEvaluator(-1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-0.9, 0.9))
def test_evenness_property(x, y):
    phi = PhiEvaluator(2.0)
    z = complex(x, y)
    assert abs(phi.phi(z) - phi.phi(-z)) <= 1e-10 * abs(phi.phi(z))
