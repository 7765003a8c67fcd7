"""
Closed-form image levels and contrast-to-noise ratio
====================================================

The reconstructed image G(x) is positive on clear pixels and negative on
opaque ones. Both classes carry signal, which is where the CNR advantage
over single-pass ghost imaging comes from.
"""

import math

from ifgi import ChainParams, ExperimentBudget, compute_transfer
from ifgi import analytics

budget = ExperimentBudget(K=10_000, u=100.0, J_p=512, J_b=512)

for M in (1, 5, 10):
    tc = compute_transfer(ChainParams(M))
    c = analytics.contrasts(tc)
    G_p, G_b = analytics.expected_image_levels(c, budget)
    cnr = analytics.cnr_exact(c, budget)
    print(f"M={M:2d}  C_p={c.C_p:.4f} C_b={c.C_b:.4f}  G_p={G_p:8.1f} G_b={G_b:8.1f}  CNR={cnr:.3f}")

# Single-pass baseline with the same budget
print("traditional CNR:", analytics.traditional_cnr(budget.K, budget.J_p, budget.J_b))

# Equal dose: the chain may take K = K'/w shots for the dose of K' single passes.
params = ChainParams(10)
K = analytics.equal_absorption_measurements(params, 1000)
print(f"equal-dose shots for K'=1000 at M=10: {K} (4M/pi^2 = {40 / math.pi**2:.3f})")
for mode in ("fixed_K", "fixed_absorption"):
    r = analytics.cnr_ratio(params, 10**4, 10**4, 10**6, mode=mode, large_k=True)
    print(f"CNR ratio, {mode}: {r:.3f}")

# Visibility depends only on the losses.
for g in (0.0, 0.3, 0.6):
    print(f"visibility gamma0=gamma1={g}: {analytics.visibility(compute_transfer(ChainParams(5, g, g))):.3f}",
          f" gamma0={g}, gamma1=0: {analytics.visibility(compute_transfer(ChainParams(5, g, 0))):.3f}")
