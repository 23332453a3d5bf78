"""
Value along one scenario, and what happens at the default
=========================================================

All three agents see the same Brownian path.  At the default the insider's
value is continuous (it had already moved to the floor), while agents holding
a long position lose value and a short position gains.
"""

from insider_default.curves import value_curve
from insider_default.market import ModelParams, validate

model = validate(ModelParams())
curve = value_curve(0.15, model, seed=0)

for agent in ("insider", "investor", "merton"):
    print(f"{agent:8s} exposure at default {curve.at_default_fraction[agent]: .3f}  "
          f"jump {curve.jump(agent): .4f}")

# %%
# In a scenario where default never arrives the investor's insurance against
# it is wasted, and the insider's full Merton position pays off.
quiet = value_curve(10.0, model, seed=0)
print({a: round(float(quiet.wealth[a][-1]), 4) for a in ("insider", "investor", "merton")})
