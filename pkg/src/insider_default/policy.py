"""Deterministic piecewise-constant strategies and their exact evaluation.

A :class:`Policy` holds the pre-default fraction ``nu`` on the cells
``(t_i, t_{i+1}]`` of a grid over ``[0, T]``, the fraction exposed at the
default instant, and the post-default rule.  For such strategies

    E[X_t**p] = x0**p * exp(int_0^t p * (mu0*nu - (1-p)/2 * sigma0**2 * nu**2) ds)

so expected utility reduces to one-dimensional quadrature over the default time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .after_default import capital_K, merton_fraction_after
from .market import Model, after_default_coeffs

# Gauss-Legendre nodes per policy cell; integrands are smooth within a cell.
_CELL_NODES = 8


class InadmissiblePolicy(ValueError):
    """The wealth would not stay positive through the default jump."""


@dataclass(frozen=True, eq=False)
class Policy:
    grid: np.ndarray
    nu: np.ndarray
    at_default: float | None = None
    post_default: Union[str, float] = "merton"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("policy grid must be strictly increasing with >= 2 knots")
        if nu.shape != (grid.size - 1,):
            raise ValueError("need one fraction per grid cell")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "nu", nu)

    @classmethod
    def constant(cls, nu: float, T: float, *, n_cells: int = 1, at_default=None,
                 post_default="merton") -> "Policy":
        grid = np.linspace(0.0, T, n_cells + 1)
        return cls(grid, np.full(n_cells, float(nu)), at_default, post_default)

    @classmethod
    def from_nodes(cls, grid, values, *, at_default=None, post_default="merton") -> "Policy":
        """Cell fractions taken as the midpoint average of node values."""
        values = np.asarray(values, dtype=float)
        return cls(grid, 0.5 * (values[1:] + values[:-1]), at_default, post_default)

    def extended_to(self, T: float) -> "Policy":
        """Append a cell up to ``T`` (keeping the last fraction) if the grid stops short."""
        if self.grid[-1] >= T * (1 - 1e-12):
            return self
        return replace(self, grid=np.append(self.grid, T), nu=np.append(self.nu, self.nu[-1]))

    def with_at_default(self, value: float | None) -> "Policy":
        return replace(self, at_default=value)

    def cell(self, t):
        idx = np.searchsorted(self.grid, np.asarray(t, dtype=float), side="left") - 1
        return np.clip(idx, 0, self.nu.size - 1)

    def fraction(self, t):
        out = self.nu[self.cell(t)]
        return float(out) if np.ndim(out) == 0 else out

    def jump_fraction(self, theta):
        """Fraction exposed to the loss at default (left limit of ``nu`` unless overridden)."""
        if self.at_default is not None:
            return np.full(np.shape(theta), float(self.at_default)) if np.ndim(theta) else float(self.at_default)
        return self.fraction(theta)

    def post_fraction(self, theta, model: Model):
        if isinstance(self.post_default, str):
            if self.post_default != "merton":
                raise ValueError(f"unknown post-default rule {self.post_default!r}")
            return merton_fraction_after(theta, model)
        return np.full(np.shape(theta), float(self.post_default)) if np.ndim(theta) else float(self.post_default)


@dataclass(frozen=True)
class Weighting:
    """``insider`` conditions on a known barrier; ``investor`` averages over its law."""

    kind: str
    barrier: float | None = None

    @classmethod
    def insider(cls, level: float) -> "Weighting":
        if level < 0:
            raise ValueError("barrier level must be non-negative")
        return cls("insider", float(level))

    @classmethod
    def investor(cls) -> "Weighting":
        return cls("investor")


INVESTOR = Weighting.investor()


def growth_rates(nu, model: Model):
    """Log-growth rate of E[X**p] per unit time for fraction ``nu`` before default."""
    pr = model.params
    nu = np.asarray(nu, dtype=float)
    return pr.p * (pr.mu0 * nu - 0.5 * (1.0 - pr.p) * pr.sigma0**2 * nu**2)


def log_moment(policy: Policy, model: Model, t):
    """``log E[(X_t / x0)**p]`` before default, exact for the piecewise policy."""
    g = growth_rates(policy.nu, model)
    knots = np.concatenate(([0.0], np.cumsum(g * np.diff(policy.grid))))
    i = policy.cell(t)
    return knots[i] + g[i] * (np.asarray(t, dtype=float) - policy.grid[i])


def jump_factor(policy: Policy, model: Model, theta):
    """``(1 - a * gamma)**p`` for the fraction ``a`` exposed at default."""
    a = np.asarray(policy.jump_fraction(theta), dtype=float)
    base = 1.0 - a * model.params.gamma
    if np.any(base <= 0.0):
        raise InadmissiblePolicy(
            f"fraction {float(np.max(a)):.6g} at default with gamma={model.params.gamma} "
            "sends wealth non-positive"
        )
    return base ** model.params.p


def post_default_factor(policy: Policy, model: Model, theta):
    """``E[(X_T / X_theta)**p]`` after a default at ``theta``."""
    if policy.post_default == "merton":
        return capital_K(theta, model)
    pr = model.params
    mu1, sigma1 = after_default_coeffs(theta, model)
    nu1 = float(policy.post_default)
    rate = pr.p * (np.asarray(mu1) * nu1 - 0.5 * (1.0 - pr.p) * np.asarray(sigma1) ** 2 * nu1**2)
    return np.exp(rate * (pr.T - np.asarray(theta, dtype=float)))


def default_branch(policy: Policy, model: Model, theta):
    """Multiplier of ``U(x0)`` on the event that default happens at ``theta <= T``."""
    return (
        np.exp(log_moment(policy, model, theta))
        * jump_factor(policy, model, theta)
        * post_default_factor(policy, model, theta)
    )


def _cell_quadrature(grid: np.ndarray, m: int = _CELL_NODES):
    x, w = np.polynomial.legendre.leggauss(m)
    a, b = grid[:-1, None], grid[1:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes, weights


def policy_multiplier(policy: Policy, model: Model, weighting: Weighting) -> float:
    """Expected utility divided by ``U(x0)``."""
    pr = model.params
    policy = policy.extended_to(pr.T)
    if weighting.kind == "insider":
        theta = model.default_time(weighting.barrier)
        if theta > pr.T:
            return float(np.exp(log_moment(policy, model, pr.T)))
        return float(default_branch(policy, model, theta))
    if weighting.kind != "investor":
        raise ValueError(f"unknown weighting {weighting.kind!r}")
    inside = policy.grid <= pr.T
    grid = policy.grid[inside]
    if grid[-1] < pr.T:
        grid = np.append(grid, pr.T)
    nodes, weights = _cell_quadrature(grid)
    integrand = model.default_density(nodes) * default_branch(policy, model, nodes)
    survival = model.survival(pr.T) * np.exp(log_moment(policy, model, pr.T))
    return float(survival + np.sum(weights * integrand))


def evaluate_policy(policy: Policy, model: Model, weighting: Weighting = INVESTOR) -> float:
    """Exact expected CRRA utility of terminal wealth under ``policy``.

    ``weighting=Weighting.insider(l)`` fixes the default time at ``l / lam``;
    the investor weighting integrates over the default-time density and adds
    the survival mass ``P(tau > T)``.

    Raises
    ------
    InadmissiblePolicy
        If the fraction exposed at a possible default has ``nu * gamma >= 1``.
    """
    pr = model.params
    return policy_multiplier(policy, model, weighting) * pr.x0**pr.p / pr.p


def survival_multipliers(policy: Policy, model: Model) -> np.ndarray:
    """Conditional value multiplier at each knot, given no default so far.

    At knot ``t`` this is ``E[U(X_T) | tau > t] / U(X_t)`` for the investor
    information, which is what a running value curve plots before default.
    """
    pr = model.params
    grid = policy.grid
    if grid[-1] < pr.T * (1 - 1e-12):
        raise ValueError("policy grid must reach T")
    nodes, weights = _cell_quadrature(grid)
    G = log_moment(policy, model, grid)
    cell_int = np.sum(
        weights * model.default_density(nodes) * default_branch(policy, model, nodes), axis=1
    )
    tail = np.concatenate((np.cumsum(cell_int[::-1])[::-1], [0.0]))
    total = model.survival(pr.T) * np.exp(G[-1]) + tail
    return total / (model.survival(grid) * np.exp(G))
