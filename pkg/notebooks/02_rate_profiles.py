"""
Rate functions and their three regimes
======================================

The decay rate A(theta) is the maximum of a concave profile in the switch
fraction u.  As theta grows the maximiser moves between u = 1, an interior
point and u = 0; the closed forms are checked against golden-section search.
"""

# %%
import numpy as np

from reducible_bbm import ModelParams, profile, rate, regime_thresholds

p = ModelParams(3.0, 0.5)
low, high = regime_thresholds(p)
print(f"theta^2 window of the interior regime: [{low:.3f}, {high:.3f}]")

for theta in np.linspace(1.05, 1.95, 10):
    r = rate(p, theta)
    print(f"theta={theta:.2f}  A={r.A:+.5f}  regime={r.regime.value:<18} "
          f"u*={r.u_star:.3f}  |closed-numeric|={r.abs_gap:.1e}")

# %%
# The profile itself at theta = 1.2, where the maximum sits at u = 0.5.
u = np.linspace(0, 1, 11)
print(" ".join(f"{profile(p, 1.2, x):+.3f}" for x in u))
