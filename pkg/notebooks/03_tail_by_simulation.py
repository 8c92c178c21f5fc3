"""
Tail probabilities by direct simulation
=======================================

Estimate P(M_t >= theta v t) with plain Monte Carlo at a few times and fit
the slope of ln p against t.  At these times the slope sits below the
asymptotic rate because of the polynomial prefactor.
"""

# %%
from reducible_bbm import ModelParams, rate, speed
from reducible_bbm.mc import empirical_rate, estimate_tail

p, theta = ModelParams(1.0, 2.0, 1.0), 1.1
v = speed(p).v
print("asymptotic rate", rate(p, theta).A)

for t in (2.0, 3.0, 4.0):
    e = estimate_tail(p, t, theta * v * t, 20_000, seed=11)
    print(f"t={t}: p={e.p_hat:.4f}  95% CI [{e.ci_low:.4f}, {e.ci_high:.4f}]  hits={e.n_hits}")

# %%
fit = empirical_rate(p, theta, (2.0, 3.0, 4.0), 20_000, seed=11)
print(f"fitted slope {fit.slope:.3f} +- {fit.stderr:.3f}")
