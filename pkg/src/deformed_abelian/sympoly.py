"""Polynomial and quasiconstant algebra.

Polynomials are dense, ascending-order, complex.  Everything that depends on
the branch parameters takes a :class:`Params`, which also fixes the
derived quantities ``b_j = exp(2 pi beta_j / xi)``, ``B_j = exp(beta_j)`` and
``tau = exp(i pi^2 / xi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = [
    "Params",
    "Poly",
    "DegeneracyError",
    "sigma",
    "scaled_product",
    "exact_form",
    "exact_form_limit",
    "basis_R",
    "basis_S",
    "kernel_X",
    "cycle_vector",
    "cycle_generator",
    "regularization_split",
    "split_kernel_shift",
    "reduce_mod_exact",
]


class DegeneracyError(ArithmeticError):
    """A construction needs tau^(4m) != 1 and the given xi violates it."""


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Params:
    """Problem configuration: deformation parameter, genus data and branch parameters."""

    xi: float
    n: int
    beta: tuple
    resonance_tol: float = 1e-9
    max_degree: int | None = None
    b: np.ndarray = field(init=False, repr=False, compare=False)
    B: np.ndarray = field(init=False, repr=False, compare=False)
    tau: complex = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        beta = tuple(float(x) for x in self.beta)
        object.__setattr__(self, "beta", beta)
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be an integer >= 1")
        object.__setattr__(self, "n", int(self.n))
        if len(beta) != 2 * self.n:
            raise ValueError(f"beta must have 2n = {2 * self.n} entries, got {len(beta)}")
        if any(y <= x for x, y in zip(beta, beta[1:])):
            raise ValueError("beta must be strictly increasing")
        arr = np.array(beta)
        object.__setattr__(self, "b", np.exp(2.0 * math.pi / self.xi * arr))
        with np.errstate(over="ignore"):  # B_j = inf only in the xi -> inf coefficient limit
            object.__setattr__(self, "B", np.exp(arr))
        object.__setattr__(self, "tau", complex(np.exp(1j * math.pi ** 2 / self.xi)))
        top = self.max_degree if self.max_degree is not None else 3 * self.n + 2
        for m in range(1, top + 1):
            if abs(self.tau ** (4 * m) - 1.0) < self.resonance_tol:
                raise DegeneracyError(
                    f"xi={self.xi} is resonant: |tau^{4 * m} - 1| < {self.resonance_tol}"
                )

    @property
    def genus(self):
        return self.n - 1

    @property
    def kappa(self):
        return 0.5 * (math.pi / self.xi + 1.0)

    def with_beta(self, beta):
        return Params(self.xi, self.n, tuple(beta), self.resonance_tol, self.max_degree)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Poly:
    """Univariate polynomial in ``a`` (= e^{2 pi alpha/xi}) or ``A`` (= e^alpha)."""

    coef: tuple
    var: str = "a"

    def __post_init__(self):
        if self.var not in ("a", "A"):
            raise ValueError("variable tag must be 'a' or 'A'")
        c = np.atleast_1d(np.asarray(self.coef, dtype=complex))
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if len(nz) else c[:0]
        object.__setattr__(self, "coef", tuple(complex(x) for x in c))

    @classmethod
    def monomial(cls, k, var="a", c=1.0):
        return cls([0.0] * k + [c], var)

    @classmethod
    def zero(cls, var="a"):
        return cls([], var)

    @property
    def coeffs(self):
        return np.array(self.coef, dtype=complex)

    @property
    def degree(self):
        return len(self.coef) - 1

    @property
    def ord(self):
        """Lowest power with a nonzero coefficient (-1 for the zero polynomial)."""
        for i, c in enumerate(self.coef):
            if c != 0:
                return i
        return -1

    def is_zero(self):
        return not self.coef

    def __call__(self, x):
        if self.is_zero():
            return np.zeros_like(np.asarray(x, dtype=complex))
        return npoly.polyval(x, self.coeffs)

    def _check(self, other):
        if isinstance(other, Poly) and other.var != self.var:
            raise ValueError(f"cannot combine polynomials in {self.var} and {other.var}")

    def __add__(self, other):
        self._check(other)
        if not isinstance(other, Poly):
            other = Poly([other], self.var)
        return Poly(npoly.polyadd(self.coeffs if self.coef else [0], other.coeffs if other.coef else [0]), self.var)

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coeffs, self.var)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            if self.is_zero() or other.is_zero():
                return Poly.zero(self.var)
            return Poly(npoly.polymul(self.coeffs, other.coeffs), self.var)
        return Poly(self.coeffs * other, self.var)

    __rmul__ = __mul__

    def scale_var(self, s):
        """The polynomial x -> P(s x)."""
        c = self.coeffs
        return Poly(c * s ** np.arange(len(c)), self.var)

    def shift_down(self):
        """P(x)/x, requiring a zero constant term."""
        return Poly(self.coeffs[1:], self.var)

    def derivative(self):
        return Poly(npoly.polyder(self.coeffs) if self.degree > 0 else [], self.var)

    def norm(self):
        return float(np.max(np.abs(self.coeffs))) if self.coef else 0.0

    def allclose(self, other, rtol=1e-12):
        d = (self - other).norm()
        return d <= rtol * max(self.norm(), other.norm(), 1e-300)

    def to_pairs(self):
        """Coefficient list as ``[[re, im], ...]`` (report format)."""
        return [[c.real, c.imag] for c in self.coef]

    @classmethod
    def from_pairs(cls, pairs, var="a"):
        out = []
        for p in pairs:
            if isinstance(p, (list, tuple)):
                re, im = (list(p) + [0.0])[:2]
                out.append(complex(re, im))
            else:
                out.append(complex(p))
        return cls(out, var)


# ---------------------------------------------------------------------------
# Symmetric functions and the basic products
# ---------------------------------------------------------------------------


def sigma(k, values):
    """Elementary symmetric polynomial sigma_k of ``values``.

    Returns 0 for ``k < 0`` or ``k > len(values)`` (so that formulas with
    shifted indices need no special cases).
    """
    values = list(values)
    if k < 0 or k > len(values):
        return 0.0
    e = [1.0] + [0.0] * len(values)
    for i, x in enumerate(values, start=1):
        for j in range(i, 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e[k]


def scaled_product(params, s):
    """prod_j (a s - b_j) as a polynomial in ``a``."""
    c = npoly.polyfromroots(params.b)
    return Poly(c * s ** np.arange(len(c)), "a")


def _as_poly(Q):
    return Q if isinstance(Q, Poly) else Poly(Q, "a")


def exact_form(Q, params):
    """Deformed total derivative Q^(a).

    Q^(a) = [prod(a tau - b_j) Q(a tau^4) - prod(a/tau - b_j) Q(a)] / a.
    """
    Q = _as_poly(Q)
    if Q.is_zero():
        return Poly.zero("a")
    tau = params.tau
    bracket = scaled_product(params, tau) * Q.scale_var(tau ** 4) - scaled_product(params, 1 / tau) * Q
    scale = max(bracket.norm(), 1e-300)
    if abs(bracket.coef[0]) > 1e-12 * scale:
        raise ArithmeticError("constant term of the exact-form bracket failed to cancel")
    return bracket.shift_down()


def exact_form_limit(Q, params):
    """Classical limit of Q^ to first order in 1/xi:
    (4 pi^2 i / xi) (P Q' + P' Q / 2), with P(a) = prod(a - b_j)."""
    Q = _as_poly(Q)
    P = scaled_product(params, 1.0)
    return (4j * math.pi ** 2 / params.xi) * (P * Q.derivative() + 0.5 * P.derivative() * Q)


# ---------------------------------------------------------------------------
# Deformed bases and the kernel
# ---------------------------------------------------------------------------


def _check_p(p, params):
    if params.n < 2 or not 1 <= p <= params.n - 1:
        raise ValueError(f"basis index p={p} outside 1..n-1 (n={params.n})")


def basis_R(p, params):
    _check_p(p, params)
    return Poly.monomial(p - 1, "a")


def _zeta_like(p, params, weight):
    n = params.n
    coef = np.zeros(2 * n, dtype=complex)
    for k in range(1, 2 * n - p + 1):
        if n <= k <= 2 * n - p:
            f = 1.0
        elif 1 <= k <= n - 1:
            f = 0.5
        else:
            continue
        coef[k - 1] += f * (-1) ** (k + p) * weight(k - p) * sigma(2 * n - p - k, params.b)
    return Poly(coef, "a")


def basis_S(p, params):
    """S_p(a) = (sum_{k=n}^{2n-p} + 1/2 sum_{k=1}^{n-1}) (-1)^{k+p}
    (tau^{k-p} - tau^{p-k}) a^{k-1} sigma_{2n-p-k}(b)."""
    _check_p(p, params)
    tau = params.tau
    return _zeta_like(p, params, lambda d: tau ** d - tau ** (-d))


def classical_zeta_poly(p, params_or_b, n=None):
    """Numerator of the classical second-kind differential zeta_p."""
    if isinstance(params_or_b, Params):
        params = params_or_b
    else:
        b = list(params_or_b)
        params = _BranchOnly(b)
    _check_p(p, params)
    return _zeta_like(p, params, lambda d: d)


@dataclass
class _BranchOnly:
    b: list

    @property
    def n(self):
        return len(self.b) // 2


def kernel_X(a, a2, params, eps=1e-12):
    """X(a, a') = tau^-1 prod(a tau - b)/(a (a tau - a'/tau)) - tau prod(a/tau - b)/(a (a/tau - a' tau))."""
    tau = params.tau
    a = np.asarray(a, dtype=complex)
    a2 = np.asarray(a2, dtype=complex)
    d1 = a * tau - a2 / tau
    d2 = a / tau - a2 * tau
    scale = np.abs(a) + np.abs(a2)
    if np.any(np.abs(d1) < eps * scale) or np.any(np.abs(d2) < eps * scale):
        raise ValueError("kernel X evaluated on its pole a tau = a' / tau or a / tau = a' tau")
    p_plus = np.prod(a[..., None] * tau - params.b, axis=-1)
    p_minus = np.prod(a[..., None] / tau - params.b, axis=-1)
    return p_plus / (tau * a * d1) - tau * p_minus / (a * d2)


def cycle_generator(params):
    """prod_j (A + i B_j) - prod_j (A - i B_j) as a polynomial in ``A``."""
    plus = npoly.polyfromroots(-1j * params.B)
    minus = npoly.polyfromroots(1j * params.B)
    return Poly(plus - minus, "A")


def cycle_vector(params):
    """Coefficients c_k (k = 0..n-1) of the relation sum_k c_k <Q, A^{2k+1}> = 0.

    The odd-power coefficients of :func:`cycle_generator` are
    ``2 i^{2n-1} (-1)^k sigma_{2n-2k-1}(B)``; dividing out the common factor
    leaves ``c_k = (-1)^k sigma_{2n-2k-1}(B)``.
    """
    n = params.n
    c = np.array([(-1) ** k * sigma(2 * n - 2 * k - 1, params.B) for k in range(n)], dtype=complex)
    gen = cycle_generator(params).coeffs
    gen = np.concatenate([gen, np.zeros(2 * n + 1 - len(gen))])
    odd = gen[1::2][:n]
    factor = 2.0 * 1j ** (2 * n - 1)
    if not np.allclose(odd, factor * c, rtol=1e-12, atol=1e-12 * np.abs(odd).max()):
        raise ArithmeticError("cycle coefficients disagree with the generating product")
    return c


# ---------------------------------------------------------------------------
# Regularisation split and reduction modulo exact forms
# ---------------------------------------------------------------------------


def _split_operator(m, params):
    """Image of Q2 = a^m under Q2 -> tau^-4 Q2(a) prod(a/tau - b) - Q2(a tau^4) prod(a tau^-3 - b)."""
    tau = params.tau
    mono = Poly.monomial(m, "a")
    return tau ** -4 * mono * scaled_product(params, 1 / tau) - mono.scale_var(tau ** 4) * scaled_product(
        params, tau ** -3
    )


def split_kernel_shift(K, params):
    """Change of Q1 when a polynomial K of degree <= n-1 is added to Q2."""
    K = _as_poly(K)
    if K.degree > params.n - 1:
        raise ValueError("kernel directions have degree <= n-1")
    out = Poly.zero("a")
    for m, c in enumerate(K.coef):
        out = out + c * _split_operator(m, params)
    return out


def regularization_split(Q, params, tol=1e-9):
    """Polynomials (Q1, Q2) with deg Q1 <= 3n-1 and

        Q(a) prod(a tau^-3 - b) = Q1(a) + tau^-4 Q2(a) prod(a/tau - b) - Q2(a tau^4) prod(a tau^-3 - b).

    The image of ``a^m`` has leading degree ``m + 2n``, so the coefficients of
    Q2 of degree n..deg Q follow by back substitution from the top row down.
    The remaining coefficients (degree < n) only move Q1 and are set to zero.
    Row-by-row elimination keeps every coefficient accurate relative to its
    own row, which matters when the b_j span many orders of magnitude.
    """
    Q = _as_poly(Q)
    n = params.n
    tau = params.tau
    target = Q * scaled_product(params, tau ** -3)
    if Q.is_zero() or target.degree <= 3 * n - 1:
        return target, Poly.zero("a")
    top = target.degree
    D = top - 2 * n
    images = {}
    for m in range(n, D + 1):
        lead = tau ** (-4 - 2 * n) - tau ** (4 * m - 6 * n)
        if abs(lead) < tol:
            raise DegeneracyError(f"xi={params.xi}: tau^{4 * (m - n + 1)} = 1 makes the split singular")
        images[m] = _split_operator(m, params).coeffs
    rest = target.coeffs.copy()
    q2 = np.zeros(D + 1, dtype=complex)
    for m in range(D, n - 1, -1):
        img = images[m]
        q2[m] = rest[m + 2 * n] / img[m + 2 * n]
        rest[: len(img)] -= q2[m] * img
        rest[m + 2 * n] = 0.0
    leftover = np.abs(rest[3 * n:])
    if leftover.size and leftover.max() > 1e-10 * np.abs(target.coeffs).max():
        raise DegeneracyError(f"xi={params.xi}: split system is ill-conditioned")
    return Poly(rest[: 3 * n], "a"), Poly(q2, "a")


def reduce_mod_exact(Q, params, tol=1e-9):
    """Representative of Q of degree <= 2n-2 modulo deformed exact forms."""
    Q = _as_poly(Q)
    n = params.n
    tau = params.tau
    while Q.degree > 2 * n - 2:
        m = Q.degree - (2 * n - 1)
        lead = tau ** (2 * n + 4 * m) - tau ** (-2 * n)
        if abs(lead) < tol:
            raise DegeneracyError(f"xi={params.xi}: exact form of a^{m} loses its leading term")
        E = exact_form(Poly.monomial(m, "a"), params)
        top = Q.degree
        Q = Q - (Q.coef[-1] / E.coef[-1]) * E
        Q = Poly(Q.coeffs[:top], "a")
    return Q
