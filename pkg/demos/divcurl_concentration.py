"""The div-curl product that concentrates on the axis.

sigma_n is divergence free and eta_n is a gradient, both bounded in the
critical exponents, yet sigma_n . eta_n does not converge weakly to the
product of the weak limits (zero).  The pairings with cylinder test
functions settle at pi/2 times chi(0) int g, while the product itself tends to zero
at every point off the axis.  In the strict exponent regime the same
pairings vanish.

Run with ``python3 demos/divcurl_concentration.py``.
"""

from __future__ import annotations

import numpy as np

from divcurl_lab.pairing import (
    PairingTable,
    concentration_coefficient,
    concentration_grid,
    cylinder_quadrature,
    default_cylinder_family,
    limit_extrapolate,
    offaxis_sup,
)
from divcurl_lab.sequences import counterexample_fields

LADDER = (8, 16, 32, 64, 128, 256, 512)

ctx = cylinder_quadrature(3, concentration_grid())
family = default_cylinder_family(3)

print("critical pair, p = 1, q = 2")
print(f"{'n':>5} {'<sigma.eta, psi_0>':>20} {'sup off |x_perp| > n^-1/2':>28}")
tables = [[] for _ in family]
for n in LADDER:
    pair = counterexample_fields(3, 1.0, n)
    prod = pair.product(ctx.points)
    for row, psi in zip(tables, family):
        row.append(ctx.integrate(prod * psi(ctx.points)))
    print(f"{n:5d} {tables[0][-1]:20.10f} {offaxis_sup(pair.product, 3, n ** -0.5):28.3e}")

res = concentration_coefficient([PairingTable(np.array(LADDER), np.array(t)) for t in tables], family)
print(f"coefficient over {len(family)} test functions: {res.coefficient:.6f}  (pi/2 = {np.pi / 2:.6f})")
print(f"spread across the family: {res.spread:.2e}")

print("\nstrict pair, p = 3/2, q = 3")
strict = [ctx.integrate(counterexample_fields(3, 1.5, n, q=3.0).product(ctx.points) * family[0](ctx.points))
          for n in LADDER]
for n, v in zip(LADDER, strict):
    print(f"{n:5d} {v:20.3e}")
est = limit_extrapolate(PairingTable(np.array(LADDER), np.array(strict)))
print(f"extrapolated limit {est.value:.2e} (rate n^-{est.rate:.2f})")
