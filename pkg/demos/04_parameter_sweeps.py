"""
Loss sweeps behind the CNR, bucket-intensity and visibility maps
=================================================================

Every sweep returns a tidy DataFrame; ``write_sweep`` stores it as CSV with
a JSON manifest. Plot the CSVs with any tool, e.g. pivot on gamma0/gamma1
and pass to ``imshow``.
"""

import tempfile

from ifgi.experiments import SweepSpec, gamma_grid, run_sweep, write_sweep

# Equal-shot CNR ratio along gamma0 for a few upper-arm losses.
fig2 = run_sweep(SweepSpec.figure_default("fig2"))
print(fig2.groupby(["alpha", "gamma1"]).cnr_ratio.agg(["min", "max"]).round(3))

# Equal-dose CNR ratio maps for six (M, alpha) panels.
fig3 = run_sweep(SweepSpec.figure_default("fig3"))
best = fig3.loc[fig3.groupby(["M", "alpha"]).cnr_ratio.idxmax()]
print(best[["M", "alpha", "gamma0", "gamma1", "cnr_ratio", "min_bucket_ratio"]].round(4))

# The largest gains sit where the buckets go dark; restrict to bright cells.
bright = fig3[fig3.min_bucket_ratio >= 10 / 7800]
print(bright.groupby(["M", "alpha"]).cnr_ratio.max().round(2))

# Bucket photons relative to a single pass, and visibility.
coarse = gamma_grid(11)
fig4 = run_sweep(SweepSpec("fig4", gamma0=coarse, gamma1=coarse))
print(fig4[(fig4.gamma1 == 0) & (fig4.M == 5)].pivot(index="gamma0", columns="i", values="ratio").round(4))
fig5 = run_sweep(SweepSpec("fig5", gamma0=coarse, gamma1=coarse))
print("low-visibility fraction:", fig5.groupby("M").low_visibility.mean().round(3).to_dict())

with tempfile.TemporaryDirectory() as out:
    csv_path, manifest = write_sweep(SweepSpec("fig5", gamma0=coarse, gamma1=coarse), out)
    print(open(csv_path).readline().strip())
