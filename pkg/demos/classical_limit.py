"""Watch deformed period ratios approach the classical hyperelliptic ones.

Branch points b = (1, 2, 3, 4) are held fixed while xi grows, so
beta_j = xi log(b_j) / (2 pi) spreads out.  Pairings are carried in log scale.

    python3 demos/classical_limit.py
"""

from deformed_abelian.identities import ClassicalCurve, classical_limit_scan, classical_period, elliptic_period_agm

b = (1.0, 2.0, 3.0, 4.0)
curve = ClassicalCurve(b)
print(f"classical period over gamma_1: quadrature {classical_period(0, 1, curve):.14f}, "
      f"AGM {elliptic_period_agm(b):.14f}")

print(f"{'xi':>6} {'r1':>14} {'classical':>14} {'dev':>10} {'r2':>14} {'classical':>14} {'dev':>10}")
for row in classical_limit_scan(b, [10.0, 20.0, 40.0, 80.0, 160.0]):
    print(f"{row.xi:6.0f} {row.r1:14.8f} {row.r1_classical:14.8f} {row.dev1:10.2e} "
          f"{row.r2:14.6e} {row.r2_classical:14.6e} {row.dev2:10.2e}")
