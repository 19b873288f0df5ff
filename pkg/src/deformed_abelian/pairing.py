"""Deformed periods: the pairing <Q, L>, its regularisation and L o M.

The pairing integrates the weight ``W(alpha) = prod_j phi~(alpha, beta_j)``
against ``Q(a) L(A) a`` with ``a = e^{2 pi alpha/xi}``, ``A = e^alpha``.
Everything is linear in the coefficients of ``Q`` and ``L``, so the engine
tabulates monomial integrals once per parameter set and contracts them with
coefficient vectors.  Monomial integrands are evaluated in log space with a
per-monomial shift, which keeps wide branch-parameter spreads in range.

Regularisation for high-degree ``Q`` follows the split
``Q prod(a tau^-3 - b) = Q1 + tau^-4 Q2(a) prod(a/tau - b) - Q2(a tau^4) prod(a tau^-3 - b)``:
``Q1`` is integrated on the line ``Im alpha = pi/2 - delta`` against
``W / prod(a tau^-3 - b)``, and ``Q2`` contributes the residues of
``W Q2(tau^4 a) L a`` at ``beta_j - i pi/2 - i k xi``, ``k = 0..floor(pi/xi)``.
The residue sum enters with the factor ``+2 pi i``: the ``Q2`` terms form the
difference ``G(alpha) - G(alpha - 2 pi i)`` integrated over the line, i.e. the
counterclockwise boundary of the strip below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .phi import PhiEvaluator
from .quad import QuadratureSpec, integrate_circle, integrate_line
from .sympoly import Params, Poly, basis_R, basis_S, regularization_split

__all__ = [
    "PairingResult",
    "DivergenceError",
    "DeformedPeriods",
    "engine",
    "pair",
    "pair_regularized",
    "intersection_quadrature",
    "intersection_residues",
    "bilinear_form",
    "bilinear_normalization",
    "default_delta",
    "max_delta",
]

TWO_PI = 2.0 * math.pi


class DivergenceError(ValueError):
    """The direct pairing integral diverges for the requested degrees."""


@dataclass
class PairingResult:
    """A deformed period with its error budget.

    ``value = scaled_value * exp(log_scale)``; the scaled form survives
    parameter ranges where the value itself would overflow.  ``scale`` bounds
    the integral of the absolute integrand (summed over monomials).
    """

    scaled_value: complex
    scaled_error: float
    scaled_scale: float
    method: str
    log_scale: float = 0.0

    @property
    def value(self):
        return self.scaled_value * math.exp(self.log_scale)

    @property
    def abs_error(self):
        return self.scaled_error * math.exp(self.log_scale)

    @property
    def scale(self):
        return self.scaled_scale * math.exp(self.log_scale)

    def __complex__(self):
        return complex(self.value)


def max_delta(xi):
    """Largest offset below Im alpha = pi/2 that keeps the regularisation line
    above every pole of W / prod(a tau^-3 - b) and keeps the strip below it
    free of residues beyond k = floor(pi/xi)."""
    return min(math.pi, (math.floor(math.pi / xi) + 1) * xi - math.pi)


def default_delta(xi):
    return 0.5 * max_delta(xi)


def _combine(table_val, table_err, table_scale, table_shift, weights):
    """Contract monomial tables with a coefficient matrix ``weights``."""
    mask = weights != 0
    if not mask.any():
        return 0j, 0.0, 0.0, 0.0
    S = float(np.max(table_shift[mask]))
    f = np.exp(table_shift - S)
    w = weights * f
    val = complex(np.sum(w[mask] * table_val[mask]))
    err = float(np.sum(np.abs(w[mask]) * table_err[mask]))
    sc = float(np.sum(np.abs(w[mask]) * table_scale[mask]))
    return val, err, sc, S


class DeformedPeriods:
    """Pairing engine for one parameter set.

    Monomial tables are computed lazily and cached; instances are not meant
    to be shared across threads while tables are still being filled.
    """

    def __init__(self, params: Params, phi: PhiEvaluator | None = None, quad: QuadratureSpec | None = None,
                 delta: float | None = None):
        self.params = params
        self.phi = phi if phi is not None else PhiEvaluator(params.xi)
        if abs(self.phi.xi - params.xi) > 0:
            raise ValueError("phi evaluator and params disagree on xi")
        self.quad = quad or QuadratureSpec()
        self.delta = default_delta(params.xi) if delta is None else float(delta)
        dmax = max_delta(params.xi)
        if not 0 < self.delta < dmax:
            raise ValueError(
                f"delta={self.delta} must lie in (0, {dmax:.6g}); larger offsets cross poles "
                "of the regularised integrand"
            )
        self._beta = np.array(params.beta)
        self._direct = {}
        self._line = {}
        self._residue = {}

    # -- weight ------------------------------------------------------------

    def log_weight(self, alpha):
        """log W(alpha) = sum_j log phi~(alpha, beta_j)."""
        alpha = np.asarray(alpha, dtype=complex)
        diffs = alpha[..., None] - self._beta
        lp = np.sum(self.phi.log_phi(diffs), axis=-1)
        return lp - self.params.kappa * (2 * self.params.n * alpha + self._beta.sum())

    def log_denominator(self, alpha):
        """log prod_j (a tau^-3 - b_j), computed without overflow."""
        xi = self.params.xi
        alpha = np.asarray(alpha, dtype=complex)
        w = TWO_PI / xi * (alpha[..., None] - self._beta) - 3j * math.pi ** 2 / xi
        logb = TWO_PI / xi * self._beta
        big = w.real > 0
        with np.errstate(over="ignore", divide="ignore"):
            out = np.where(
                big,
                logb + w + np.log1p(-np.exp(-np.where(big, w, 0))),
                logb + 1j * math.pi + np.log1p(-np.exp(np.where(big, 0, w))),
            )
        return np.sum(out, axis=-1)

    # -- monomial tables -----------------------------------------------------

    def _rates(self, p_exp, k_exp, extra_plus=0.0):
        xi, n = self.params.xi, self.params.n
        slope = TWO_PI / xi * (p_exp + 1) + k_exp
        plus = 2 * n * (math.pi / xi + 1.0) + extra_plus - slope
        minus = slope
        return plus, minus

    def _table(self, which, keys, y0):
        """Integrate exp(log W + c alpha) [/ denominator] along Im alpha = y0
        for every (p, k) in ``keys``."""
        xi = self.params.xi
        n = self.params.n
        extra = 4.0 * n * math.pi / xi if which == "line" else 0.0
        coefs = np.array([TWO_PI / xi * (p + 1) + k for p, k in keys])
        plus, minus = zip(*(self._rates(p, k, extra) for p, k in keys))
        plus, minus = np.array(plus), np.array(minus)
        if (plus <= 0).any() or (minus <= 0).any():
            bad = [keys[i] for i in np.nonzero((plus <= 0) | (minus <= 0))[0]]
            raise DivergenceError(f"monomials (deg a, deg A) = {bad} give a divergent integral; "
                                  "use the regularised pairing")

        def log_integrand(x):
            alpha = np.asarray(x, dtype=float) + 1j * y0
            lw = self.log_weight(alpha)
            if which == "line":
                lw = lw - self.log_denominator(alpha)
            return lw[:, None] + coefs[None, :] * alpha[:, None]

        lo, hi = self._beta[0], self._beta[-1]
        span = max(40.0, 30.0 / min(plus.min(), minus.min()))
        probe = np.arange(lo - span, hi + span + 0.5, 0.5)
        shift = np.max(log_integrand(probe).real, axis=0)
        center = 0.5 * (lo + hi)

        def f(x):
            return np.exp(log_integrand(x) - shift[None, :])

        res = integrate_line(f, float(minus.min()), float(plus.min()), self.quad, center=center)
        val = np.atleast_1d(res.value)
        err = np.atleast_1d(res.abs_error)
        sc = np.atleast_1d(res.scale)
        return {key: (val[i], err[i], sc[i], shift[i]) for i, key in enumerate(keys)}

    def _ensure(self, store, which, keys, y0):
        missing = [k for k in keys if k not in store]
        if missing:
            store.update(self._table(which, missing, y0))

    def direct_table(self, p_max, k_max):
        keys = [(p, k) for p in range(p_max + 1) for k in range(k_max + 1)]
        self._ensure(self._direct, "direct", keys, 0.0)
        return self._direct

    # -- residues on Gamma ---------------------------------------------------

    def gamma_points(self):
        """Pole locations (j, k, alpha) enclosed by the contour Gamma."""
        xi = self.params.xi
        kmax = math.floor(math.pi / xi)
        pts = []
        for j, b in enumerate(self._beta):
            for k in range(kmax + 1):
                pts.append((j, k, b - 1j * (0.5 * math.pi + k * xi)))
        return pts

    def _weight_residue_log(self, j, k):
        """log of Res_{alpha0} W at alpha0 = beta_j - i(pi/2 + k xi)."""
        b = self._beta
        a0 = b[j] - 1j * (0.5 * math.pi + k * self.params.xi)
        res_phi = self.phi.phi_residue(k, 0, -1)
        others = np.delete(b, j)
        log_rest = np.sum(self.phi.log_phi(a0 - others)) - self.params.kappa * (
            2 * self.params.n * a0 + b.sum()
        )
        return a0, np.log(res_phi) + log_rest

    def residue_table(self, i_max, k_max):
        """Gamma-term for monomials: 2 pi i sum Res [W a^{i+1} A^k] (tau^4 folded in by caller)."""
        xi = self.params.xi
        keys = [(i, k) for i in range(i_max + 1) for k in range(k_max + 1)]
        missing = [key for key in keys if key not in self._residue]
        if missing:
            pts = [self._weight_residue_log(j, k) for j, k, _ in self.gamma_points()]
            for i, kk in missing:
                c = TWO_PI / xi * (i + 1) + kk
                logs = np.array([lr + c * a0 for a0, lr in pts])
                shift = float(np.max(logs.real))
                terms = np.exp(logs - shift)
                val = 2j * math.pi * np.sum(terms)
                sc = 2 * math.pi * float(np.sum(np.abs(terms)))
                self._residue[(i, kk)] = (val, 1e-13 * sc, sc, shift)
        return self._residue

    def residue_check(self, j, k, i=0, kk=1, spec=None):
        """Compare the analytic residue of W a^{i+1} A^kk at a Gamma point with a
        circle quadrature; returns (analytic, quadrature)."""
        xi = self.params.xi
        a0, lr = self._weight_residue_log(j, k)
        c = TWO_PI / xi * (i + 1) + kk
        analytic = np.exp(lr + c * a0)
        b = self._beta
        gaps = [abs(x - b[j]) for m, x in enumerate(b) if m != j]
        radius = 0.3 * min([xi, math.pi] + gaps)

        def f(z):
            return np.exp(self.log_weight(z) + c * z)

        circ = integrate_circle(f, a0, radius, spec or QuadratureSpec(target_rel_err=1e-12))
        return complex(analytic), complex(circ.value)

    # -- pairings ------------------------------------------------------------

    @staticmethod
    def _coef(P, var):
        if not isinstance(P, Poly):
            P = Poly(P, var)
        if P.var != var:
            raise ValueError(f"expected a polynomial in {var}, got one in {P.var}")
        return P

    def pair(self, Q, L):
        """Direct pairing <Q, L> (convergent range only)."""
        Q = self._coef(Q, "a")
        L = self._coef(L, "A")
        n = self.params.n
        if L.degree > 2 * n - 1:
            raise DivergenceError(f"deg L = {L.degree} exceeds 2n-1 = {2 * n - 1}")
        if Q.is_zero() or L.is_zero():
            return PairingResult(0j, 0.0, 0.0, "direct")
        qc, lc = Q.coeffs, L.coeffs
        keys = [(p, k) for p in range(len(qc)) for k in range(len(lc)) if qc[p] != 0 and lc[k] != 0]
        self._ensure(self._direct, "direct", keys, 0.0)
        return self._contract(self._direct, keys, qc, lc, "direct")

    def _contract(self, store, keys, qc, lc, method, extra=None):
        val = np.array([store[k][0] for k in keys], dtype=complex)
        err = np.array([store[k][1] for k in keys])
        sc = np.array([store[k][2] for k in keys])
        sh = np.array([store[k][3] for k in keys])
        w = np.array([qc[p] * lc[k] for p, k in keys], dtype=complex)
        if extra is not None:
            ev, ee, es, esh, ew = extra
            val = np.concatenate([val, ev])
            err = np.concatenate([err, ee])
            sc = np.concatenate([sc, es])
            sh = np.concatenate([sh, esh])
            w = np.concatenate([w, ew])
        v, e, s, S = _combine(val, err, sc, sh, w)
        return PairingResult(v, e, s, method, S)

    def pair_regularized(self, Q, L, split=None):
        """Regularised pairing for arbitrary Q; ``split`` overrides (Q1, Q2)."""
        Q = self._coef(Q, "a")
        L = self._coef(L, "A")
        n = self.params.n
        if L.degree > 2 * n - 1:
            raise DivergenceError(f"deg L = {L.degree} exceeds 2n-1 = {2 * n - 1}")
        if Q.is_zero() or L.is_zero():
            return PairingResult(0j, 0.0, 0.0, "regularized")
        Q1, Q2 = split if split is not None else regularization_split(Q, self.params)
        if Q1.degree > 3 * n - 1:
            raise ValueError("Q1 must have degree <= 3n-1")
        lc = L.coeffs
        q1 = Q1.coeffs
        y0 = 0.5 * math.pi - self.delta
        keys = [(i, k) for i in range(len(q1)) for k in range(len(lc)) if q1[i] != 0 and lc[k] != 0]
        self._ensure(self._line, "line", keys, y0)
        extra = None
        if not Q2.is_zero():
            q2 = Q2.coeffs * self.params.tau ** (4 * np.arange(len(Q2.coeffs)))
            rkeys = [(i, k) for i in range(len(q2)) for k in range(len(lc)) if q2[i] != 0 and lc[k] != 0]
            table = self.residue_table(len(q2) - 1, len(lc) - 1)
            extra = (
                np.array([table[k][0] for k in rkeys], dtype=complex),
                np.array([table[k][1] for k in rkeys]),
                np.array([table[k][2] for k in rkeys]),
                np.array([table[k][3] for k in rkeys]),
                np.array([q2[i] * lc[k] for i, k in rkeys], dtype=complex),
            )
        return self._contract(self._line, keys, q1, lc, "regularized", extra)

    def pair_auto(self, Q, L):
        """Direct pairing when deg Q <= n-1, regularised otherwise."""
        Q = self._coef(Q, "a")
        if Q.degree <= self.params.n - 1:
            return self.pair(Q, L)
        return self.pair_regularized(Q, L)

    # -- intersection number -------------------------------------------------

    def intersection_quadrature(self, L, M):
        return intersection_quadrature(L, M, self.params, self.quad)

    def intersection_residues(self, L, M):
        return intersection_residues(L, M, self.params)

    def bilinear_form(self, L, M):
        """(lhs, rhs, residual) of the deformed Riemann bilinear identity.

        ``rhs = bilinear_normalization(params) * (L o M)``.  Both L and M must
        vanish at A = 0, the window in which the pairing is a deformed period.
        """
        L = self._coef(L, "A")
        M = self._coef(M, "A")
        n = self.params.n
        if n < 2:
            raise ValueError("the bilinear identity needs n >= 2 (empty basis for n = 1)")
        for name, P in (("L", L), ("M", M)):
            if P.degree > 2 * n - 1:
                raise DivergenceError(f"deg {name} = {P.degree} exceeds 2n-1 = {2 * n - 1}")
            if not P.is_zero() and P.ord < 1:
                raise ValueError(f"{name} must have no constant term (1 <= deg <= 2n-1 window)")
        lhs = 0j
        scales = 0.0
        for p in range(1, n):
            R = basis_R(p, self.params)
            S = basis_S(p, self.params)
            rl, rm = self.pair(R, L), self.pair(R, M)
            sl, sm = self.pair_auto(S, L), self.pair_auto(S, M)
            lhs += rl.value * sm.value - sl.value * rm.value
            scales += rl.scale * sm.scale + sl.scale * rm.scale
        rhs = bilinear_normalization(self.params) * intersection_residues(L, M, self.params)
        denom = abs(lhs) + abs(rhs) + scales
        residual = abs(lhs - rhs) / denom if denom > 0 else 0.0
        return complex(lhs), complex(rhs), float(residual)


def bilinear_normalization(params):
    """Constant relating the period side of the bilinear identity to L o M.

    Equals ``(-1)**(n+1) * i * xi / 2``: the pole of ``1/sh(pi/xi (alpha - alpha' - pi i))``
    contributes ``2 pi i * xi/pi``, the functional equation for phi a factor
    ``1/4``, and the phase of ``C**(4n) = (-1)**n |C|**(4n)`` the sign.
    """
    return (-1) ** (params.n + 1) * 0.5j * params.xi


# ---------------------------------------------------------------------------
# Intersection number
# ---------------------------------------------------------------------------


def _intersection_numerator(L, M):
    """(L(A) M(-A) - L(-A) M(A)) / A as a polynomial in A."""
    L = L if isinstance(L, Poly) else Poly(L, "A")
    M = M if isinstance(M, Poly) else Poly(M, "A")
    if L.is_zero() or M.is_zero():
        return Poly.zero("A")
    N = L * M.scale_var(-1) - L.scale_var(-1) * M
    if N.is_zero():
        return N
    if abs(N.coef[0]) > 1e-14 * N.norm():
        raise ArithmeticError("intersection numerator must be odd")
    return N.shift_down()


def _check_B(params, eps=1e-12):
    B = params.B
    d = np.abs(B[:, None] - B[None, :])[~np.eye(len(B), dtype=bool)]
    if d.size and d.min() < eps * B.max():
        raise ValueError("B_j values collide; the intersection number degenerates")


def intersection_quadrature(L, M, params, quad=None):
    """L o M = int_R (L(A)M(-A) - L(-A)M(A)) / (A prod(A^2 + B_j^2)) dA by quadrature."""
    _check_B(params)
    N = _intersection_numerator(L, M)
    if N.is_zero():
        return 0j
    n = params.n
    if N.degree + 1 >= 4 * n:
        raise DivergenceError("intersection integrand decays too slowly")
    B2 = params.B ** 2

    def f(t):
        A = np.exp(t)
        return 2.0 * N(A) * A / np.prod(A[:, None] ** 2 + B2[None, :], axis=1)

    minus = 1.0 + 2 * N.ord
    plus = 4 * n - 1 - N.degree
    center = float(np.mean(np.log(params.B)))
    res = integrate_line(f, minus, plus, quad or QuadratureSpec(target_rel_err=1e-12), center=center)
    return complex(res.value)


def intersection_residues(L, M, params):
    """L o M by residues at A = i B_j in the upper half plane."""
    _check_B(params)
    N = _intersection_numerator(L, M)
    if N.is_zero():
        return 0j
    B = params.B
    total = 0j
    for j, Bj in enumerate(B):
        others = np.delete(B, j)
        denom = 2j * Bj * np.prod(others ** 2 - Bj ** 2)
        total += N(1j * Bj) / denom
    return complex(2j * math.pi * total)


# ---------------------------------------------------------------------------
# Functional interface
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def engine(params: Params, phi: PhiEvaluator | None = None, quad: QuadratureSpec | None = None,
           delta: float | None = None) -> DeformedPeriods:
    """Shared engine for a parameter set (tables are reused across calls)."""
    return DeformedPeriods(params, phi, quad, delta)


def pair(Q, L, params, phi=None, quad=None):
    return engine(params, phi, quad).pair(Q, L)


def pair_regularized(Q, L, params, phi=None, quad=None, delta=None, split=None):
    return engine(params, phi, quad, delta).pair_regularized(Q, L, split=split)


def bilinear_form(L, M, params, phi=None, quad=None):
    return engine(params, phi, quad).bilinear_form(L, M)
