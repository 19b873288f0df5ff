"""A short tour of the special function phi.

Evaluates phi along its three code paths, checks the shift relations at a
point, and prints the first few pole residues.  Run with

    python3 demos/phi_tour.py
"""

import cmath
import math

from deformed_abelian import PhiEvaluator

xi = 2.0
phi = PhiEvaluator(xi)
print(f"xi = {xi}:  C = phi(0) = {phi.C:.12f}  (|C| = {abs(phi.C):.6f}, arg C / pi = {cmath.phase(phi.C) / math.pi})")

# inside the base strip all three paths are available
z = 0.4 + 0.3j
for path in ("base", "product", "shift"):
    print(f"  phi({z}) via {path:8s} = {complex(phi.phi(z, path=path)):.14f}")

# the defining relation and the two shifts
sh = lambda w: cmath.sinh(math.pi / xi * w)
r_pi = phi.phi(z + 1j * math.pi) * phi.phi(z) * 4 * sh(z + 0.5j * math.pi) * cmath.cosh(z)
r_2pi = -phi.phi(z + 2j * math.pi) / phi.phi(z) * sh(z + 1.5j * math.pi) / sh(z + 0.5j * math.pi)
r_xi = phi.phi(z + 1j * xi) / phi.phi(z) * cmath.cosh(0.5 * (z + 0.5j * math.pi + 1j * xi)) / cmath.cosh(
    0.5 * (z - 0.5j * math.pi))
print(f"  relation residuals: {abs(r_pi - 1):.1e}  {abs(r_2pi - 1):.1e}  {abs(r_xi - 1):.1e}")

# decay along the real axis: |phi(x)| e^{kappa x} settles to a constant
for x in (5.0, 10.0, 20.0):
    print(f"  x = {x:5.1f}:  |phi| e^(kappa x) = {abs(phi.phi(x)) * math.exp(phi.kappa * x):.10f}")

# residues at i(pi/2 + m xi); their size oscillates in m rather than decaying
print("  residues at i(pi/2 + m xi):")
for m in range(5):
    res = phi.phi_residue(m, check=True)
    print(f"    m = {m}:  {res:.10f}   |res| = {abs(res):.4f}")
print(f"  Res^2 at i pi/2 = {phi.phi_residue(0) ** 2:.12f},  -i xi/(4 pi) = {-1j * xi / (4 * math.pi):.12f}")
