"""Two ways of computing the L^(p,1) norm of a step function.

The distribution-function integral and the rearrangement integral differ by
exactly the factor p, so any implementation must fix one normalization.
Indicator functions have norm |E|^(1/p) under the distribution form.

Run with ``python3 demos/lorentz_norms.py``.
"""

from __future__ import annotations

import numpy as np

from divcurl_lab.lorentz import WeightedSamples, lorentz_norm, lorentz_norm_rearrangement, rearrangement

rng = np.random.default_rng(0)
print(f"{'p':>5} {'distribution':>14} {'rearrangement':>14} {'ratio':>8}")
for p in (1.0, 1.5, 2.0, 3.0):
    s = WeightedSamples(rng.uniform(0, 5, 20), rng.uniform(0.01, 0.1, 20))
    a, b = lorentz_norm(s, p), lorentz_norm_rearrangement(s, p)
    print(f"{p:5.1f} {a:14.8f} {b:14.8f} {b / a:8.4f}")

s = WeightedSamples([2, 1], [0.1, 0.4])
print(f"\ntwo levels: rearrangement {rearrangement(s)}, norm for p = 2: {lorentz_norm(s, 2):.7f}")
print(f"indicator of a set of measure 0.25, p = 2: {lorentz_norm(WeightedSamples([1.0], [0.25]), 2)}")
