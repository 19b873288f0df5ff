"""The special function phi(alpha) and the weight phi~(alpha, beta).

``phi`` is defined in the strip ``|Im alpha| < pi/2`` by

    phi(alpha) = C exp(-2 int_0^inf sin^2(k alpha/2) sh((pi+xi)k/2)
                                   / (k sh(xi k/2) sh(pi k)) dk)

Expanding the hyperbolic ratio as a double geometric series and integrating
term by term gives a product valid in the whole plane,

    phi(alpha) = C prod_{m,l>=0} p1^2/(p1^2+alpha^2) * (p2^2+alpha^2)/p2^2,
    p1 = pi/2 + m xi + 2 pi l,   p2 = 3pi/2 + xi + m xi + 2 pi l.

The product over ``l`` is a ratio of Gamma functions,

    prod_l p^2/(p^2+alpha^2) = G(u+v) G(u-v) / G(u)^2,  u = c/2pi, v = i alpha/2pi,

with ``c = p - 2 pi l``, so only the sum over ``m`` is truncated.  Its tail
is summed by Euler-Maclaurin; the integral term reduces to a finite interval
because consecutive ``c`` values of the two families differ by ``pi + xi``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma, psi

from .quad import QuadratureSpec, integrate_circle, integrate_line

__all__ = [
    "PhiEvaluator",
    "PoleProximityError",
    "BaseStripError",
    "phi_tail_exponent",
]

TWO_PI = 2.0 * math.pi
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


class PoleProximityError(ValueError):
    """Argument lies on (or too close to) the pole lattice of phi."""


class BaseStripError(ValueError):
    """Argument outside the strip where the defining integral converges."""


def phi_tail_exponent(xi):
    """Rate kappa in phi(alpha) ~ exp(-kappa |alpha|), kappa = (pi/xi + 1)/2."""
    return 0.5 * (math.pi / xi + 1.0)


_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6)


def _polygamma(n, z):
    """psi^(n)(z) for n >= 1 and complex z with Re z > 0.

    Recurrence up to Re z >= 20, then the Stirling-type asymptotic series.
    """
    z = np.array(z, dtype=complex)
    acc = np.zeros_like(z)
    sign = (-1) ** n
    fact = math.factorial(n)
    while True:
        small = z.real < 20.0
        if not small.any():
            break
        acc[small] -= sign * fact / z[small] ** (n + 1)
        z[small] += 1.0
    w = 1.0 / z
    series = math.factorial(n - 1) * w ** n + 0.5 * fact * w ** (n + 1)
    for k, b in enumerate(_BERNOULLI, start=1):
        series = series + b * math.factorial(2 * k + n - 1) / math.factorial(2 * k) * w ** (2 * k + n)
    return acc + (-1) ** (n + 1) * series


@dataclass(frozen=True)
class PhiEvaluator:
    """Evaluates phi, phi~, their residues and the normalisation constant C.

    ``product_truncation`` is ``(m_terms, l_terms)``: ``m_terms`` lattice rows
    are summed explicitly before the Euler-Maclaurin tail; ``l_terms`` only
    bounds the residue index ``l`` (the ``l`` direction is summed exactly).
    Instances are immutable; ``C`` is computed at construction.
    """

    xi: float
    product_truncation: tuple = (16, 64)
    base_margin: float = math.pi / 8
    quad: QuadratureSpec = field(default_factory=lambda: QuadratureSpec(target_rel_err=1e-13))
    pole_eps: float = 1e-12
    probes: tuple = (0.3, 0.7, 1.1)
    C: complex = field(init=False)
    C_spread: float = field(init=False)

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        if not 0 < self.base_margin < math.pi / 2:
            raise ValueError("base_margin must lie in (0, pi/2)")
        m_terms = int(self.product_truncation[0])
        if m_terms < 4:
            raise ValueError("need at least 4 explicit lattice rows")
        self._check_resonance()
        C, spread = self._constant_and_spread(self.probes)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "C_spread", spread)

    # -- configuration -----------------------------------------------------

    @property
    def kappa(self):
        return phi_tail_exponent(self.xi)

    def _check_resonance(self, reach=4.0 * math.pi):
        xi = self.xi
        poles = [0.5 * math.pi + m * xi for m in range(int(reach / xi) + 2)]
        zeros = [1.5 * math.pi + xi + m * xi for m in range(int(reach / xi) + 2)]
        pts = sorted(p + TWO_PI * l for p in poles + zeros for l in range(3))
        gaps = np.diff(pts)
        if len(gaps) and gaps.min() < 1e-6:
            warnings.warn(
                f"xi={xi}: pole/zero lattice points of phi nearly coincide "
                f"(min gap {gaps.min():.1e}); results near them are unreliable",
                RuntimeWarning,
                stacklevel=3,
            )

    # -- product representation -------------------------------------------

    def _log_ratio(self, alpha, exclude=None):
        """log(phi/C) by the Gamma-product; ``exclude=m`` drops the singular
        factor G((c1_m + i alpha)/2pi) of row ``m`` (used for residues)."""
        alpha = np.asarray(alpha, dtype=complex)
        shape = alpha.shape
        alpha = alpha.reshape(-1)
        xi = self.xi
        M = int(self.product_truncation[0])
        if exclude is not None:
            M = max(M, exclude + 2)
        m = np.arange(M)
        c1 = 0.5 * math.pi + m * xi
        c2 = 1.5 * math.pi + xi + m * xi
        out = np.empty(alpha.shape, dtype=complex)
        base1 = 2.0 * loggamma(c1 / TWO_PI).real
        base2 = 2.0 * loggamma(c2 / TWO_PI).real
        chunk = max(1, 200000 // M)
        for start in range(0, alpha.size, chunk):
            a = alpha[start:start + chunk, None]
            v = 1j * a / TWO_PI
            u1 = c1[None, :] / TWO_PI
            u2 = c2[None, :] / TWO_PI
            plus1 = loggamma(u1 + v)
            if exclude is not None:
                plus1[:, exclude] = 0.0
            h1 = plus1 + loggamma(u1 - v) - base1
            h2 = loggamma(u2 + v) + loggamma(u2 - v) - base2
            explicit = np.sum(h1, axis=1) - np.sum(h2, axis=1)
            out[start:start + chunk] = explicit + self._tail(a[:, 0], M * xi)
        return out.reshape(shape)

    def _h(self, c, alpha):
        v = 1j * alpha / TWO_PI
        u = c / TWO_PI
        return loggamma(u + v) + loggamma(u - v) - 2.0 * loggamma(u).real

    def _tail(self, alpha, shift):
        """Euler-Maclaurin sum of rows m >= M (``shift = M xi``)."""
        xi = self.xi
        c1 = 0.5 * math.pi + shift
        c2 = 1.5 * math.pi + xi + shift
        a = alpha[:, None]
        v = 1j * a / TWO_PI
        # integral of h over [c1, c2] by Gauss-Legendre
        half = 0.5 * (c2 - c1)
        nodes = 0.5 * (c1 + c2) + half * _GL_NODES
        integral = half * np.sum(_GL_WEIGHTS * self._h(nodes[None, :], a), axis=1)
        h_c1 = self._h(c1, alpha)
        h_c2 = self._h(c2, alpha)

        def deriv(j, c):
            # j-th derivative of h in c
            u = c / TWO_PI
            vv = v[:, 0]
            if j == 1:
                g = psi(u + vv) + psi(u - vv) - 2.0 * psi(u)
            else:
                g = _polygamma(j - 1, u + vv) + _polygamma(j - 1, u - vv) - 2.0 * _polygamma(j - 1, u)
            return g / TWO_PI ** j

        total = integral / xi + 0.5 * (h_c1 - h_c2)
        for k, b in enumerate(_BERNOULLI[:4], start=1):
            j = 2 * k - 1
            total = total - b / math.factorial(2 * k) * xi ** j * (deriv(j, c1) - deriv(j, c2))
        return total

    def nearest_lattice_distance(self, alpha):
        """Distance from ``alpha`` to the nearest pole of phi."""
        alpha = np.asarray(alpha, dtype=complex)
        y = np.abs(alpha.imag)
        x = alpha.real
        # poles at +-i p with p = pi/2 + m xi + 2 pi l
        best = np.full(alpha.shape, np.inf)
        for l in range(int(self.product_truncation[1])):
            base = 0.5 * math.pi + TWO_PI * l
            if base > np.max(y, initial=0.0) + TWO_PI + self.xi:
                break
            mm = np.clip(np.round((y - base) / self.xi), 0, None)
            for dm in (-1, 0, 1):
                p = base + np.clip(mm + dm, 0, None) * self.xi
                best = np.minimum(best, np.hypot(x, y - p))
        return best

    def _guard_poles(self, alpha):
        d = self.nearest_lattice_distance(alpha)
        if np.any(d < self.pole_eps):
            bad = np.ravel(np.asarray(alpha))[np.argmin(np.ravel(d))]
            raise PoleProximityError(f"alpha={bad!r} lies on the pole lattice of phi (xi={self.xi})")

    def log_phi(self, alpha):
        """Complex logarithm of phi (any branch), vectorised, product path."""
        self._guard_poles(alpha)
        return np.log(self.C) + self._log_ratio(alpha)

    def phi_product(self, alpha):
        return np.exp(self.log_phi(alpha))

    def _constant_from_probe(self, alpha):
        # C^2 comes out as i times a positive number: the relation can only
        # hold without extra factors for C = e^{i pi/4} |C|.
        xi = self.xi
        rhs = 1.0 / (4.0 * np.sinh(math.pi / xi * (alpha + 0.5j * math.pi)) * np.cosh(alpha))
        lp = self._log_ratio(np.array([alpha, alpha + 1j * math.pi]))
        c2 = complex(rhs / np.exp(lp[0] + lp[1]))
        if abs(c2.real) > 1e-8 * abs(c2) or c2.imag <= 0:
            raise ArithmeticError(f"C^2 = {c2} is not on the positive imaginary axis; truncation too coarse")
        return complex(np.sqrt(c2))

    def _constant_and_spread(self, probes):
        if len(probes) < 1:
            raise ValueError("need at least one probe point")
        values = [self._constant_from_probe(a) for a in probes]
        C = values[0]
        spread = max(abs(v / C - 1.0) for v in values)
        if spread > 1e-8:
            raise ArithmeticError(
                f"normalisation constant depends on the probe point (spread {spread:.2e}); "
                "increase product_truncation"
            )
        return C, spread

    def compute_constant(self, probes=None):
        """C from the relation phi(alpha + pi i) phi(alpha) = 1/(4 sh ch) at the probes.

        Complex: C = e^{i pi/4} |C|.  Raises if the probes disagree beyond 1e-8.
        """
        return self._constant_and_spread(self.probes if probes is None else tuple(probes))[0]

    # -- defining integral -------------------------------------------------

    def phi_base(self, alpha):
        """phi from its defining k-integral; valid for |Im alpha| <= pi/2 - base_margin."""
        arr = np.asarray(alpha, dtype=complex)
        if np.any(np.abs(arr.imag) > 0.5 * math.pi - self.base_margin + 1e-15):
            raise BaseStripError("argument outside the base strip; use phi() or phi_product()")
        flat = arr.reshape(-1)
        xi = self.xi
        ymax = float(np.max(np.abs(flat.imag), initial=0.0))

        def integrand(t):
            k = np.exp(t)[:, None]
            # hyperbolic ratio = 2 e^{-pi k/2} * bounded
            bounded = (-np.expm1(-(math.pi + xi) * k)) / (np.expm1(-xi * k) * np.expm1(-TWO_PI * k))
            damp = -0.5 * math.pi * k
            ka = k * flat[None, :]
            with np.errstate(over="ignore", invalid="ignore"):
                near = 2.0 * np.sin(0.5 * ka) ** 2 * np.exp(damp)
            far = np.exp(damp) - 0.5 * (np.exp(damp + 1j * ka) + np.exp(damp - 1j * ka))
            one_minus_cos = np.where(np.abs(ka.imag) < 20.0, near, far)
            return one_minus_cos * bounded

        res = integrate_line(integrand, 1.0, 0.5 * math.pi - ymax, self.quad)
        J = np.asarray(res.value).reshape(arr.shape)
        out = self.C * np.exp(-2.0 * J)
        return out if out.shape else complex(out)

    # -- functional-equation continuation ---------------------------------

    def phi_shift(self, alpha, _depth=0):
        """phi by shifting ``alpha`` into the base strip with the functional
        equations (cross-check path; needs C)."""
        alpha = complex(alpha)
        xi = self.xi
        lim = 0.5 * math.pi - self.base_margin
        if _depth > 200:
            raise ArithmeticError("shift reduction did not terminate")
        if alpha.imag < 0:
            return self.phi_shift(-alpha, _depth + 1)
        y = alpha.imag
        if y <= lim:
            return complex(self.phi_base(alpha))
        if abs(y - 0.5 * math.pi) >= self.base_margin and y < 1.5 * math.pi:
            # phi(alpha) phi(alpha - i pi) = 1 / (4 sh(pi/xi (alpha - i pi/2)) ch(alpha - i pi))
            prev = alpha - 1j * math.pi
            rhs = 1.0 / (4.0 * np.sinh(math.pi / xi * (prev + 0.5j * math.pi)) * np.cosh(prev))
            return complex(rhs / self.phi_shift(prev, _depth + 1))
        if y >= 1.5 * math.pi and y - TWO_PI > -1.5 * math.pi:
            prev = alpha - TWO_PI * 1j
            ratio = -np.sinh(math.pi / xi * (prev + 0.5j * math.pi)) / np.sinh(
                math.pi / xi * (prev + 1.5j * math.pi)
            )
            return complex(self.phi_shift(prev, _depth + 1) * ratio)
        # near the first pole line: move down by i xi
        prev = alpha - 1j * xi
        ratio = np.cosh(0.5 * (prev - 0.5j * math.pi)) / np.cosh(0.5 * (prev + 0.5j * math.pi + 1j * xi))
        return complex(self.phi_shift(prev, _depth + 1) * ratio)

    def phi(self, alpha, path="auto"):
        """phi(alpha); ``path`` is ``auto``, ``base``, ``product`` or ``shift``.

        ``auto`` uses the defining integral inside the base strip and the
        product elsewhere.
        """
        if path == "base":
            return self.phi_base(alpha)
        if path == "product":
            out = self.phi_product(alpha)
            return out if np.ndim(out) else complex(out)
        if path == "shift":
            if np.ndim(alpha):
                return np.array([self.phi_shift(a) for a in np.ravel(alpha)]).reshape(np.shape(alpha))
            return self.phi_shift(alpha)
        if path != "auto":
            raise ValueError(f"unknown path {path!r}")
        arr = np.asarray(alpha, dtype=complex)
        inside = np.abs(arr.imag) <= 0.5 * math.pi - self.base_margin
        out = np.empty(arr.shape, dtype=complex)
        if inside.any():
            out[inside] = self.phi_base(arr[inside])
        if (~inside).any():
            out[~inside] = self.phi_product(arr[~inside])
        return out if out.shape else complex(out)

    # -- weight and residues -------------------------------------------------

    def log_phi_tilde(self, alpha, beta):
        """log phi~(alpha, beta) = log phi(alpha - beta) - kappa (alpha + beta).

        Real part is the log-magnitude, imaginary part the phase.
        """
        alpha = np.asarray(alpha, dtype=complex)
        return self.log_phi(alpha - beta) - self.kappa * (alpha + beta)

    def phi_tilde(self, alpha, beta):
        out = np.exp(self.log_phi_tilde(alpha, beta))
        return out if np.ndim(out) else complex(out)

    def pole(self, m, l=0, sign=1):
        return sign * 1j * (0.5 * math.pi + m * self.xi + TWO_PI * l)

    def phi_residue(self, m, l=0, sign=1, check=False):
        """Residue of phi at ``sign * i (pi/2 + m xi + 2 pi l)``.

        From the Gamma form: near the pole ``G((c1_m + i alpha)/2pi)`` behaves
        like ``(-1)^l / l! / ((i/2pi)(alpha - alpha0))``.  With ``check=True``
        the value is compared with a circle quadrature around the pole.
        """
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if m < 0 or l < 0 or l >= self.product_truncation[1]:
            raise ValueError("(m, l) outside the configured truncation")
        a0 = self.pole(m, l, 1)
        rest = self._log_ratio(np.array([a0]), exclude=m)[0]
        res = self.C * np.exp(rest) * (-1) ** l / math.factorial(l) * (TWO_PI / 1j)
        res = complex(res) * sign
        if check:
            other = self._nearest_other_pole(m, l)
            radius = 0.4 * other
            circ = integrate_circle(
                lambda z: self.phi_product(z), self.pole(m, l, sign), radius,
                QuadratureSpec(target_rel_err=1e-12), nearest_singularity=other,
            )
            if abs(circ.value - res) > 1e-8 * abs(res):
                raise ArithmeticError(
                    f"residue cross-check failed at (m={m}, l={l}): {res} vs {circ.value}"
                )
        return res

    def _nearest_other_pole(self, m, l):
        p = 0.5 * math.pi + m * self.xi + TWO_PI * l
        cands = [2 * p]
        for mm in range(0, m + int(TWO_PI / self.xi) + 3):
            for ll in range(0, l + 2):
                q = 0.5 * math.pi + mm * self.xi + TWO_PI * ll
                if abs(q - p) > 1e-9:
                    cands.append(abs(q - p))
        # zeros do not limit analyticity, but keep the circle away from them too
        for mm in range(0, m + int(TWO_PI / self.xi) + 3):
            for ll in range(0, l + 2):
                q = 1.5 * math.pi + self.xi + mm * self.xi + TWO_PI * ll
                cands.append(abs(q - p))
        return min(cands)
