"""
Phase diagram of the two-type process
=====================================

Which type drives the front depends only on (beta, sigma2).  This walks a
coarse grid, prints the region map and the front speed in each region.
"""

# %%
# A coarse grid over (0, 3]^2, rows are sigma2 from top to bottom.
import numpy as np

from reducible_bbm import ModelParams, Region, classify_region, speed

betas = np.linspace(0.1, 3.0, 30)
sigma2s = np.linspace(3.0, 0.1, 15)
marks = {Region.I: "1", Region.II: "2", Region.III: "3", Region.BOUNDARY: "."}

for s2 in sigma2s:
    row = "".join(marks[classify_region(ModelParams(b, s2))] for b in betas)
    print(f"sigma2={s2:4.2f} {row}")
print(" " * 12 + "beta ->")

# %%
# Speeds.  In the anomalous region the front outruns both single-type fronts.
for b, s2 in [(1.0, 2.0), (0.5, 1.5), (3.0, 0.5), (2.0, 0.3)]:
    p = ModelParams(b, s2)
    s = speed(p)
    print(f"beta={b}, sigma2={s2}: region {classify_region(p).value:>3}, "
          f"v={s.v:.5f}, log correction {s.log_correction:.4f}, "
          f"single-type speeds {np.sqrt(2):.4f} / {np.sqrt(2 * b * s2):.4f}")
