"""Running value of the three agents along one simulated market scenario."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .after_default import remaining_K
from .before_default import (
    ValueSolution,
    merton_fraction_clamped,
    solve_insider_Y,
    solve_investor_Y,
)
from .market import Model
from .mc import block_generator, brownian_increments, utility, wealth_path
from .policy import Policy, survival_multipliers

AGENTS = ("insider", "investor", "merton")


@dataclass(frozen=True, eq=False)
class ValueCurve:
    """Per-agent value ``multiplier * U(wealth)`` on a time grid.

    When default happens at ``theta <= T`` the time ``theta`` appears twice:
    first just before the jump (``defaulted == 0``), then just after it.
    """

    t: np.ndarray
    defaulted: np.ndarray
    values: dict[str, np.ndarray]
    wealth: dict[str, np.ndarray]
    theta: float
    at_default_fraction: dict[str, float]

    @property
    def defaults(self) -> bool:
        return bool(self.defaulted.any())

    def initial(self, agent: str) -> float:
        return float(self.values[agent][0])

    def jump(self, agent: str) -> float:
        """Value just after minus just before default (0 without default)."""
        if not self.defaults:
            return 0.0
        k = int(np.argmax(self.defaulted))
        v = self.values[agent]
        return float(v[k] - v[k - 1])

    def rows(self):
        for i in range(self.t.size):
            yield (self.t[i], *(self.values[a][i] for a in AGENTS), int(self.defaulted[i]))


def value_curve(
    level: float,
    model: Model,
    seed: int = 0,
    *,
    n_steps: int = 2000,
    investor_floor: float | None = None,
    investor: ValueSolution | None = None,
    cap_before_default: bool = False,
) -> ValueCurve:
    """Value curves for a scenario where the barrier is ``level``.

    Every agent faces the same Brownian path (seeded by ``seed``).  Before
    default the insider's multiplier is conditional on the barrier, the
    investor's and Merton's on survival so far; after default all three hold
    the post-default Merton fraction, worth ``K`` over the remaining horizon.
    """
    pr = model.params
    theta = float(model.default_time(level))
    defaults = theta <= pr.T
    base = np.linspace(0.0, pr.T, n_steps + 1)
    times = np.union1d(base, [theta]) if defaults else base
    dW = brownian_increments(times, block_generator(seed, 0))

    ins = solve_insider_Y(level, model, n_steps=n_steps, cap_before_default=cap_before_default)
    if investor is None:
        investor = solve_investor_Y(model, floor=investor_floor, n_steps=n_steps)
    merton = Policy.constant(merton_fraction_clamped(model), pr.T, n_cells=n_steps)
    policies = {"insider": ins.to_policy(), "investor": investor.to_policy(), "merton": merton}
    pre_mult = {
        "insider": lambda t: ins.multiplier_at(t),
        "investor": lambda t: investor.multiplier_at(t),
        "merton": lambda t: np.interp(t, merton.grid, survival_multipliers(merton, model)),
    }

    d = theta if defaults else None
    if defaults:
        k = int(np.searchsorted(times, theta))
        t_out = np.insert(times, k, theta)
        flag = (np.arange(t_out.size) > k).astype(int)
    else:
        t_out, flag = times, np.zeros(times.size, dtype=int)

    values, wealth, exposure = {}, {}, {}
    for name, pol in policies.items():
        X = wealth_path(pol, model, times, dW, d)
        if defaults:
            a = float(pol.jump_fraction(theta))
            exposure[name] = a
            X = np.insert(X, k, X[k] / (1.0 - a * pr.gamma))
        else:
            exposure[name] = float(pol.jump_fraction(pr.T))
        # rows with flag 0 all lie at or before theta
        mult = np.where(flag == 1, remaining_K(min(theta, pr.T), t_out, model), pre_mult[name](t_out))
        values[name] = mult * utility(X, pr.p)
        wealth[name] = X
    return ValueCurve(t_out, flag, values, wealth, theta, exposure)
