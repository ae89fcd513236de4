"""One-dimensional homogenization with laminates and a stiff inclusion.

The exact solutions of -(a_n u')' = 1 converge weakly to the solution of
the harmonic-mean problem, the fluxes a_n u_n' converge, and the gradients
keep oscillating.  The stiff inclusion has sup a_n = n, but its L1 norm stays
below 2, and the fluxes still converge.

Run with ``python3 demos/homogenization_bench.py``.
"""

from __future__ import annotations

from divcurl_lab.homog1d import (
    coefficient_bound_track,
    effective_coefficient,
    flux_convergence_test,
    stiff_inclusion,
    two_phase_laminate,
)

LADDER = (8, 32, 128, 512)

a_star = effective_coefficient(two_phase_laminate(1))
print(f"laminate {{1, 4}}: harmonic mean a* = {a_star}")
rep = flux_convergence_test(two_phase_laminate, LADDER, a_star)
print(f"{'n':>5} {'<flux, x>':>14} {'L2 error':>12} {'grad L2 error':>14}")
for i, n in enumerate(LADDER):
    print(f"{n:5d} {rep.flux['x'][i]:14.8f} {rep.l2_error[i]:12.2e} {rep.grad_l2_error[i]:14.4f}")
print(f"reference <flux, x> = {rep.flux_reference['x']:.8f}")

print("\nstiff inclusion: value n on a fraction 1/n of each cell")
rep = flux_convergence_test(stiff_inclusion, LADDER, 1.0)
for i, n in enumerate(LADDER):
    print(f"{n:5d} sup a_n = {rep.sup_coefficient[i]:6.0f}  flux rel err = {rep.relative_errors('flux', i)['x']:.2e}")
for rho in (1, 2):
    track = coefficient_bound_track(stiff_inclusion, LADDER, rho)
    verdict = "bounded" if track.bounded else "unbounded"
    print(f"||a_n||_L^{rho}: {', '.join(f'{v:.3f}' for v in track.norms)} -> {verdict}")
