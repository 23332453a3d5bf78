"""
After default: the closed-form value multiplier
================================================

Once the counterparty has defaulted the market is complete again, with
drift and volatility that depend on when the default struck.  The optimal
CRRA value is ``K(theta) * x**p / p``; here we tabulate ``K`` and check it
against a Monte Carlo estimate built from the state-price density.
"""

import numpy as np

from insider_default.after_default import capital_K, kbar_investor, merton_fraction_after
from insider_default.market import ModelParams, validate
from insider_default.mc import estimate_capital_K

model = validate(ModelParams())

# %%
# K is one at both ends: at theta = 0 the post-default drift is zero, at
# theta = T there is no horizon left.
print(" theta        K     MC(K)   stderr  nu1")
for theta in np.linspace(0.0, 1.0, 5):
    est = estimate_capital_K(theta, model, n=100_000, seed=0)
    print(f"{theta:6.2f} {capital_K(theta, model):8.6f} {est.mean:8.6f} {est.stderr:8.1e} "
          f"{merton_fraction_after(theta, model):5.2f}")

# %%
# The investor sees the same K, weighted by the density of the default time.
theta = np.linspace(0.0, 1.0, 5)
print(kbar_investor(theta, model) / capital_K(theta, model))
print(0.3 * np.exp(-0.3 * theta))
