"""
Transfer coefficients of the beam-splitter chain
=================================================

A photon entering the lower port of an M-stage chain is rotated a little
at every beam splitter. A clear pixel lets the rotation accumulate, so the
light ends up in the upper output; an opaque pixel keeps resetting the upper
arm, pinning the light in the lower output.
"""

import math

import numpy as np

from ifgi import ChainParams, absorption_weight, compute_transfer, transfer_grid

# Lossless chains: clear pixels go fully to D_1, opaque pixels mostly to D_0.
for M in (1, 2, 5, 10, 50):
    tc = compute_transfer(ChainParams(M))
    print(f"M={M:3d}  chi_p1={tc.chi_p1.real:+.4f}  chi_b0={tc.chi_b0.real:.4f}  "
          f"absorbed={tc.absorption_weight:.4f}  (pi^2/4M = {math.pi**2 / (4 * M):.4f})")

# Mirror losses: gamma0 on the lower arm, gamma1 on the upper arm.
tc = compute_transfer(ChainParams(10, gamma0=0.2, gamma1=0.1))
print("lossy M=10:", {k: round(abs(getattr(tc, k)) ** 2, 5) for k in ("chi_p0", "chi_p1", "chi_b0", "chi_b1")})

# Whole loss grids are vectorised; chi_abs carries the cycle index on axis 0.
g = np.linspace(0, 0.9, 4)
grid = transfer_grid(5, g[:, None], g[None, :])
print("|chi_b0|^2 over (gamma0, gamma1):")
print(np.round(np.abs(grid.chi_b0) ** 2, 4))

# Dose per opaque pixel relative to a single pass, shrinking like 1/M.
print("absorption weight M=200:", absorption_weight(ChainParams(200)))
