"""Deformed periods, exact forms and the bilinear identity for genus 1.

    python3 demos/bilinear_identity.py
"""

import numpy as np

from deformed_abelian import DeformedPeriods, Params, Poly
from deformed_abelian.sympoly import basis_R, basis_S, exact_form

A = lambda k: Poly.monomial(k, "A")

for xi in (2.0, 1.1):
    params = Params(xi=xi, n=2, beta=(-1.0, -0.3, 0.4, 1.2))
    eng = DeformedPeriods(params)
    print(f"xi = {xi}, beta = {params.beta}, delta = {eng.delta:.4f}")

    # table of deformed periods <a^p, A^k>
    for p in range(2):
        row = [eng.pair(Poly.monomial(p, "a"), A(k)).value for k in range(1, 4)]
        print(f"  <a^{p}, A^k>, k = 1..3:", "  ".join(f"{v:.6e}" for v in row))

    # exact forms pair to zero (the pairing needs the regularised contour)
    Qh = exact_form(Poly((1.0,), "a"), params)
    r = eng.pair_regularized(Qh, A(1))
    print(f"  deg Q^ = {Qh.degree}:  |<Q^, A>| / scale = {abs(r.value) / r.scale:.1e}")

    # R_1 is first kind, S_1 second kind
    print(f"  R_1 = {basis_R(1, params).coeffs.round(6)}")
    print(f"  S_1 = {basis_S(1, params).coeffs.round(6)}")

    rng = np.random.default_rng(0)
    for _ in range(3):
        L = Poly(np.r_[0.0, rng.normal(size=3)], "A")
        M = Poly(np.r_[0.0, rng.normal(size=3)], "A")
        lhs, rhs, res = eng.bilinear_form(L, M)
        print(f"  periods side {lhs:.10e}   (-1)^(n+1) (i xi/2) L o M = {rhs:.10e}   residual {res:.1e}")
    print()
