"""
Where the closed forms and the profile maximum part ways
========================================================

Three places where the printed closed forms do not match the profile
maximum, each reproduced with concrete numbers.
"""

# %%
# Region I with beta < 1: for small theta the end-switch formula is not
# the maximum of the profile.
import warnings

from reducible_bbm import ModelParams, optimal_strategy, rate, rate_numeric
from reducible_bbm.ratefn import closed_form_rate, interior_literal_form

warnings.simplefilter("ignore")
p = ModelParams(0.5, 2.1)
r = rate(p, 1.1)
print(f"closed form {r.A:.4f}, profile maximum {r.numeric_check:.4f} at u={rate_numeric(p, 1.1)[0]:.3f}")

# %%
# Region II strip 2 - beta < sigma2 < 1/beta: theta = 1 lands in the
# interior window and the interior formula is positive there.
p = ModelParams(0.5, 1.9)
print(f"A(1) from the closed form: {closed_form_rate(p, 1.0)[0]:.4f}")

# %%
# Region III interior: the literal expression against the derived value.
p = ModelParams(3.0, 0.5)
print(f"literal {interior_literal_form(p, 1.2):.4f}, derived {rate(p, 1.2).A:.4f}")

# %%
# The switch crowd exponent can be negative while the identity still holds.
for q, th in [(ModelParams(0.5, 1.5), 1.2), (ModelParams(2.0, 0.8), 2.5 ** 0.5)]:
    s = optimal_strategy(q, th)
    print(f"beta0={s.beta0:+.4f}, exponent {s.exponent():+.4f} vs A {rate(q, th).A:+.4f}")
