"""Numerical integration primitives.

Three rules cover every integral in the package:

* :func:`integrate_line` -- trapezoid (sinc) rule on the whole real line for
  integrands that are analytic in a strip and decay exponentially at both
  ends.  The decay rates are supplied by the caller and drive truncation.
* :func:`integrate_segment` -- finite intervals, optionally with
  inverse-square-root singularities at the endpoints.
* :func:`integrate_circle` -- ``(1/2 pi i)`` times a closed circle integral,
  i.e. the sum of residues inside the circle.

All rules evaluate integrands in complex arithmetic and accept vector-valued
integrands: ``f(x)`` may return shape ``(N,)`` or ``(N, m)`` for ``N`` nodes.
Summation uses :func:`math.fsum` over fixed-order node sets so results are
reproducible for a given :class:`QuadratureSpec`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "QuadratureError",
    "integrate_line",
    "integrate_segment",
    "integrate_circle",
    "tanh_sinh_nodes",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy and effort settings shared by all rules.

    ``nodes_per_panel`` sets the starting resolution: nodes per unit length
    for the line rule, the starting node count for segment and circle rules.
    """

    target_rel_err: float = 1e-10
    max_depth: int = 10
    truncation_margin: float = 10.0
    nodes_per_panel: int = 4

    def __post_init__(self):
        if not self.target_rel_err > 0:
            raise ValueError("target_rel_err must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not self.truncation_margin > 0:
            raise ValueError("truncation_margin must be positive")
        if self.nodes_per_panel < 1:
            raise ValueError("nodes_per_panel must be >= 1")

    def replace(self, **changes) -> "QuadratureSpec":
        params = {**self.__dict__, **changes}
        return QuadratureSpec(**params)


@dataclass
class QuadResult:
    """Integral value with a conservative error estimate.

    ``scale`` is the integral of ``|f|`` (component-wise), the reference for
    relative accuracy when the integral itself cancels.
    """

    value: np.ndarray | complex
    abs_error: np.ndarray | float
    scale: np.ndarray | float
    n_evals: int = 0
    converged: bool = True
    interval: tuple = field(default=(None, None))


class QuadratureError(ArithmeticError):
    """Raised when a rule fails to reach its target; carries the best estimate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def _fsum_complex(values, axis=0):
    """Order-fixed compensated sum of a complex array along axis 0."""
    values = np.asarray(values)
    if values.ndim == 1:
        return complex(math.fsum(values.real), math.fsum(values.imag))
    flat = values.reshape(values.shape[0], -1)
    out = np.empty(flat.shape[1], dtype=complex)
    for j in range(flat.shape[1]):
        out[j] = complex(math.fsum(flat[:, j].real), math.fsum(flat[:, j].imag))
    return out.reshape(values.shape[1:])


def _evaluate(f, x):
    y = np.asarray(f(x), dtype=complex)
    if y.shape[0] != np.shape(x)[0]:
        raise ValueError("integrand must return one row per node")
    bad = ~np.isfinite(y)
    if bad.any():
        idx = np.argwhere(bad)[0][0]
        raise FloatingPointError(f"integrand is not finite at node x={np.ravel(x)[idx]!r}")
    return y


def _as_output(arr):
    arr = np.asarray(arr)
    if arr.ndim == 0:
        return arr.item()
    return arr


# ---------------------------------------------------------------------------
# Whole real line
# ---------------------------------------------------------------------------


def integrate_line(f, decay_minus, decay_plus, spec=None, *, center=0.0, raise_on_failure=True):
    """Integrate ``f`` over the real line.

    ``|f(x)|`` must fall off at least like ``exp(-decay_plus * x)`` as
    ``x -> +inf`` and like ``exp(decay_minus * x)`` as ``x -> -inf``.  Nodes
    are laid out around ``center``; the grid is extended outward until the
    analytic tail bound ``|f(x_end)| / rate`` is below the target, then the
    step is halved until two successive trapezoid sums agree.
    """
    spec = spec or QuadratureSpec()
    if not (decay_minus > 0 and decay_plus > 0):
        raise ValueError("decay rates must be positive (exponential decay required)")
    tol = spec.target_rel_err
    h = 1.0 / spec.nodes_per_panel
    chunk = max(8, int(4.0 / h))

    def tail_ok(vals, rate, scale):
        edge = np.max(np.abs(vals[-2:]), axis=0) if vals.ndim > 1 else np.max(np.abs(vals[-2:]))
        bound = edge / rate * spec.truncation_margin
        return np.all(bound <= tol * np.maximum(scale, 1e-300))

    # grow the grid at step h; indices are integers j, x = center + j*h
    j_lo, j_hi = -chunk, chunk
    xs = center + h * np.arange(j_lo, j_hi + 1)
    ys = _evaluate(f, xs)
    n_evals = len(xs)
    grow = 0
    while True:
        scale = h * np.sum(np.abs(ys), axis=0)
        right_ok = tail_ok(ys[::-1][:2][::-1], decay_plus, scale)
        left_ok = tail_ok(ys[:2], decay_minus, scale)
        if right_ok and left_ok:
            break
        grow += 1
        if grow > 400:
            res = QuadResult(_as_output(h * _fsum_complex(ys)), np.inf, _as_output(scale), n_evals, False)
            raise QuadratureError("line integral: truncation did not settle", res)
        step = chunk * min(grow, 8)
        if not right_ok:
            new = center + h * np.arange(j_hi + 1, j_hi + step + 1)
            ys = np.concatenate([ys, _evaluate(f, new)])
            j_hi += step
            n_evals += len(new)
        if not left_ok:
            new = center + h * np.arange(j_lo - step, j_lo)
            ys = np.concatenate([_evaluate(f, new), ys])
            j_lo -= step
            n_evals += len(new)

    lo, hi = center + h * j_lo, center + h * j_hi
    total = _fsum_complex(ys)
    estimate = h * total
    scale = h * np.sum(np.abs(ys), axis=0)
    tail = (np.max(np.abs(ys[-2:]), axis=0) / decay_plus + np.max(np.abs(ys[:2]), axis=0) / decay_minus)
    converged = False
    err = np.inf
    for depth in range(spec.max_depth):
        mids = lo + h * (np.arange(j_hi - j_lo) + 0.5)
        ym = _evaluate(f, mids)
        n_evals += len(mids)
        total = total + _fsum_complex(ym)
        new_estimate = 0.5 * h * total
        scale = 0.5 * (scale + h * np.sum(np.abs(ym), axis=0))
        err = np.abs(new_estimate - estimate)
        estimate = new_estimate
        h *= 0.5
        j_lo, j_hi = 2 * j_lo, 2 * j_hi
        if depth >= 1 and np.all(err <= tol * np.maximum(scale, 1e-300)):
            converged = True
            break
    result = QuadResult(
        _as_output(estimate),
        _as_output(err + tail),
        _as_output(scale),
        n_evals,
        converged,
        (lo, hi),
    )
    if not converged and raise_on_failure:
        raise QuadratureError("line integral did not converge within max_depth", result)
    return result


# ---------------------------------------------------------------------------
# Finite segments
# ---------------------------------------------------------------------------


def tanh_sinh_nodes(level):
    """Nodes and weights of the tanh-sinh rule on [-1, 1] with step 2**-level.

    Also returns ``1 - |x|`` computed without cancellation.
    """
    h = 2.0 ** (-level)
    t_max = 3.2
    t = h * np.arange(-int(t_max / h), int(t_max / h) + 1)
    u = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(u)
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    comp = 2.0 / (1.0 + np.exp(2.0 * np.abs(u)))
    keep = (comp > np.finfo(float).eps) & (w > 0)
    return x[keep], w[keep], comp[keep]


def integrate_segment(f, a, b, singular_endpoints=(False, False), spec=None):
    """Integrate ``f`` over ``[a, b]``.

    Endpoints flagged in ``singular_endpoints`` may carry an inverse square
    root singularity.  Two singular endpoints use ``x = (a+b)/2 - (b-a)/2 cos t``
    with the midpoint rule in ``t`` (spectral for the periodic result); one
    singular endpoint uses a quadratic map and Gauss-Legendre; regular
    segments use tanh-sinh.  Node counts double until successive values agree.
    """
    spec = spec or QuadratureSpec()
    if not a < b:
        raise ValueError("need a < b")
    left, right = (bool(s) for s in singular_endpoints)
    tol = spec.target_rel_err
    L = b - a

    if left and right:
        def rule(level):
            n = 8 * spec.nodes_per_panel * 2 ** level
            t = (np.arange(n) + 0.5) * np.pi / n
            x = a + L * np.sin(0.5 * t) ** 2
            return x, np.full(n, np.pi / n) * 0.5 * L * np.sin(t)
    elif left or right:
        def rule(level):
            n = 8 * spec.nodes_per_panel * 2 ** level
            s, w = np.polynomial.legendre.leggauss(n)
            s = 0.5 * (s + 1.0)
            w = 0.5 * w
            if left:
                x = a + L * s ** 2
            else:
                x = b - L * s ** 2
            return x, w * 2.0 * L * s
    else:
        def rule(level):
            x, w, _ = tanh_sinh_nodes(level + 1)
            return 0.5 * (a + b) + 0.5 * L * x, 0.5 * L * w

    prev = None
    n_evals = 0
    for level in range(spec.max_depth + 1):
        x, w = rule(level)
        y = _evaluate(f, x)
        n_evals += len(x)
        wy = w.reshape((-1,) + (1,) * (y.ndim - 1)) * y
        val = _fsum_complex(wy)
        scale = np.sum(np.abs(wy), axis=0)
        if prev is not None:
            err = np.abs(val - prev)
            if np.all(err <= tol * np.maximum(scale, 1e-300)):
                return QuadResult(_as_output(val), _as_output(err), _as_output(scale), n_evals, True, (a, b))
        prev = val
    res = QuadResult(_as_output(val), _as_output(err), _as_output(scale), n_evals, False, (a, b))
    raise QuadratureError("segment integral did not converge within max_depth", res)


# ---------------------------------------------------------------------------
# Circles
# ---------------------------------------------------------------------------


def integrate_circle(f, center, radius, spec=None, *, nearest_singularity=None):
    """Return ``(1/2 pi i) * contour integral of f`` on a counterclockwise circle.

    Uses the uniform trapezoid rule, which converges geometrically for
    integrands analytic in an annulus around the circle.
    """
    spec = spec or QuadratureSpec()
    if not radius > 0:
        raise ValueError("radius must be positive")
    if nearest_singularity is not None and radius >= nearest_singularity:
        raise ValueError(
            f"radius {radius} reaches the nearest other singularity at distance {nearest_singularity}"
        )
    tol = spec.target_rel_err
    prev = None
    n_evals = 0
    for level in range(spec.max_depth + 1):
        n = 16 * spec.nodes_per_panel * 2 ** level
        dz = radius * np.exp(2j * np.pi * np.arange(n) / n)
        y = _evaluate(f, center + dz)
        n_evals += n
        wy = (dz / n).reshape((-1,) + (1,) * (y.ndim - 1)) * y
        val = _fsum_complex(wy)
        scale = np.sum(np.abs(wy), axis=0)
        if prev is not None:
            err = np.abs(val - prev)
            if np.all(err <= tol * np.maximum(scale, 1e-300)):
                return QuadResult(_as_output(val), _as_output(err), _as_output(scale), n_evals, True)
        prev = val
    res = QuadResult(_as_output(val), _as_output(err), _as_output(scale), n_evals, False)
    raise QuadratureError("circle integral did not converge within max_depth", res)
