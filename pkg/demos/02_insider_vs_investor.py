"""
Before default: insider, investor and a default-blind Merton agent
==================================================================

The insider knows the barrier and hence the default time.  It holds the
constrained Merton fraction until the default, switching to the short-sale
floor at the instant itself.  The investor only knows the default intensity
and trades off growth against the loss at a random default.
"""

import numpy as np

from insider_default.before_default import (
    insider_ex_ante_value,
    merton_value,
    solve_insider_Y,
    solve_investor_Y,
)
from insider_default.market import ModelParams, validate

model = validate(ModelParams())

# %%
# Insider value as a function of its barrier level.  Levels above lam*T = 0.3
# mean "no default before T", and the value is Merton's e^(0.045) * U(1).
for level in (0.0, 0.05, 0.15, 0.3, 1.0):
    sol = solve_insider_Y(level, model)
    print(f"barrier {level:4.2f}  default at {model.default_time(level):5.2f}  Y(0) = {sol.Y0:.6f}")

# %%
# The investor's optimal fraction moves over time as the default hazard and
# the post-default value K(t) evolve.
inv = solve_investor_Y(model)
for t in (0.0, 0.25, 0.5, 0.75, 1.0):
    i = int(np.searchsorted(inv.grid, t))
    print(f"t={t:4.2f}  nu={inv.policy[i]: .3f}  y={inv.Y[i]:.6f}")

# %%
# Before the barrier is revealed the insider's value is an average over its
# law.  With the same short-sale floor the insider always does at least as
# well as the investor; the default-blind Merton agent does worst.
ex = insider_ex_ante_value(model)
print(f"insider {ex.value:.6f} (quadrature error {ex.quadrature_error:.1e})")
print(f"investor with floor {solve_investor_Y(model, floor=model.params.delta).value:.6f}")
print(f"investor unconstrained {inv.value:.6f}")
print(f"merton {merton_value(model):.6f}")
