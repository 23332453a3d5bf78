"""
Without a short-sale floor the insider's utility is unbounded
=============================================================

Just before the known default the insider shorts ``psi`` times its wealth
and collects ``1 + gamma * psi`` when the asset drops.  The exposure window
is short, so the diffusion noise is small.
"""

from insider_default.market import ModelParams, validate
from insider_default.mc import unbounded_wealth_experiment

model = validate(ModelParams())
for row in unbounded_wealth_experiment([0, 1, 5, 25, 125], model, n=100_000, seed=0):
    print(f"psi={row.psi:6.1f}  E[X_T]={row.mean_wealth:8.4f}  E[U]={row.mean_utility:8.4f} +- {row.stderr:.1e}")
