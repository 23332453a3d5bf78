"""Before-default dynamic programming for the insider, the investor and Merton.

With deterministic coefficients the value of each agent before default is
``Y(t) * U(X_t)`` where the multiplier ``Y`` solves a scalar backward ODE
``dY/dt = -f(t, Y)``, the driver ``f`` being a pointwise supremum over the
invested fraction.

* Insider with barrier ``l``: the driver is the constrained Merton growth
  rate times ``Y`` and the ODE stops at the known default time
  ``theta = l / lam``, where ``Y(theta) = K(theta) * (1 + delta*gamma)**p``
  (the insider flips to the short-sale floor at the default instant).
* Investor: the default may strike at any time with hazard ``lam``; the
  driver ``(p mu0 nu - p(1-p)/2 sigma0^2 nu^2 - lam) y + lam K(t) (1 - nu gamma)^p``
  is maximised numerically over ``nu < 1/gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .after_default import capital_K
from .market import Model
from .ode import solve_backward
from .policy import INVESTOR, Policy, evaluate_policy

#: Margin keeping fractions strictly below ``1/gamma``.
EPS = 1e-6

TERMINAL_VARIANTS = ("corrected", "over_p")


@dataclass(frozen=True)
class DriverResult:
    nu_star: float
    f_value: float


@dataclass(frozen=True, eq=False)
class ValueSolution:
    """Backward solution on ``[0, min(theta, T)]`` (insider) or ``[0, T]`` (investor).

    ``policy`` holds the maximising fraction at each grid time;
    ``at_default`` is the fraction used at the default instant (``None``
    when it is simply the left limit of ``policy``).
    """

    grid: np.ndarray
    Y: np.ndarray
    policy: np.ndarray
    terminal_kind: str               # "no-default", "default-at" or "investor"
    error_estimate: float
    model: Model
    theta: float | None = None
    at_default: float | None = None

    @property
    def Y0(self) -> float:
        return float(self.Y[0])

    @property
    def value(self) -> float:
        pr = self.model.params
        return self.Y0 * pr.x0**pr.p / pr.p

    def to_policy(self) -> Policy:
        T = self.model.params.T
        if self.grid.size < 2:
            return Policy.constant(self.policy[0], T, at_default=self.at_default)
        return Policy.from_nodes(self.grid, self.policy, at_default=self.at_default).extended_to(T)

    def multiplier_at(self, t):
        return np.interp(t, self.grid, self.Y)


# --------------------------------------------------------------------------
# insider


def insider_bounds(model: Model, cap_before_default: bool = False) -> tuple[float, float]:
    """Admissible range for the insider's pre-default fraction.

    The short-sale floor ``-delta`` always applies.  Positivity through the
    jump only restricts the fraction *at* the known default instant, where the
    optimum is ``-delta`` anyway, so by default no upper cap is imposed before
    default; ``cap_before_default=True`` caps at ``(1 - EPS)/gamma`` throughout.
    """
    pr = model.params
    hi = (1.0 - EPS) / pr.gamma if cap_before_default else math.inf
    return -pr.delta, hi


def optimize_driver_insider(t, y, model: Model, cap_before_default: bool = False) -> DriverResult:
    """Maximise ``p*y*(mu0*nu - (1-p)/2*sigma0^2*nu^2)`` over the admissible range."""
    pr = model.params
    lo, hi = insider_bounds(model, cap_before_default)
    nu = float(np.clip(pr.merton_fraction, lo, hi))
    rate = pr.p * (pr.mu0 * nu - 0.5 * (1.0 - pr.p) * pr.sigma0**2 * nu**2)
    y = np.asarray(y, dtype=float)
    f = rate * y
    return DriverResult(nu, float(f) if f.ndim == 0 else f)


def _insider_terminal(theta, model: Model, terminal: str):
    pr = model.params
    if terminal not in TERMINAL_VARIANTS:
        raise ValueError(f"terminal must be one of {TERMINAL_VARIANTS}, got {terminal!r}")
    theta = np.asarray(theta, dtype=float)
    at_default = np.asarray(capital_K(np.minimum(theta, pr.T), model)) * (1.0 + pr.delta * pr.gamma) ** pr.p
    if terminal == "over_p":
        at_default = at_default / pr.p
    return np.where(theta > pr.T, 1.0, at_default)


def _solve_insider_batch(levels, model, n_steps, terminal, cap_before_default, rtol):
    pr = model.params
    theta = np.atleast_1d(np.asarray(model.default_time(levels), dtype=float))
    t_end = np.minimum(theta, pr.T)
    y_end = _insider_terminal(theta, model, terminal)

    def f(t, y):
        return optimize_driver_insider(t, y, model, cap_before_default).f_value

    sol = solve_backward(f, y_end, np.zeros_like(t_end), t_end, n_steps, rtol)
    return theta, sol


def solve_insider_Y(
    level: float,
    model: Model,
    *,
    n_steps: int = 2000,
    terminal: str = "corrected",
    cap_before_default: bool = False,
    rtol: float | None = 1e-6,
) -> ValueSolution:
    """Insider's value multiplier for a known barrier ``level``.

    ``terminal="over_p"`` divides the at-default terminal value by ``p``;
    it is kept only to demonstrate that direct evaluation rejects it.
    """
    if level < 0:
        raise ValueError("barrier level must be non-negative")
    pr = model.params
    theta, sol = _solve_insider_batch(level, model, n_steps, terminal, cap_before_default, rtol)
    theta = float(theta[0])
    grid, Y = sol.t[:, 0], sol.y[:, 0]
    if theta == 0.0:
        grid, Y = grid[:1], Y[:1]
    nu = optimize_driver_insider(0.0, 1.0, model, cap_before_default).nu_star
    kind = "no-default" if theta > pr.T else "default-at"
    return ValueSolution(
        grid=grid,
        Y=Y,
        policy=np.full(grid.size, nu),
        terminal_kind=kind,
        error_estimate=sol.error_estimate,
        model=model,
        theta=theta,
        at_default=-pr.delta,
    )


def insider_value(
    level,
    model: Model,
    *,
    n_steps: int = 2000,
    terminal: str = "corrected",
    cap_before_default: bool = False,
    rtol: float | None = 1e-6,
):
    """Insider value ``Y(0) * U(x0)``, vectorised over barrier levels."""
    pr = model.params
    _, sol = _solve_insider_batch(level, model, n_steps, terminal, cap_before_default, rtol)
    out = sol.y[0] * pr.x0**pr.p / pr.p
    return float(out[0]) if np.ndim(level) == 0 else out


@dataclass(frozen=True)
class ExAnteValue:
    value: float
    quadrature_error: float
    integrator_error: float
    survival_part: float
    default_part: float


def insider_ex_ante_value(
    model: Model,
    *,
    n_nodes: int = 64,
    n_steps: int = 2000,
    cap_before_default: bool = False,
    terminal: str = "corrected",
) -> ExAnteValue:
    """Insider value averaged over the barrier law.

    The default-before-``T`` part is Gauss-Legendre quadrature in the
    default probability ``u = P(tau <= theta)``, which maps the exponential
    weight to a uniform one; the survival atom ``P(tau > T)`` multiplies the
    no-default value exactly.  ``quadrature_error`` compares ``n_nodes``
    with ``n_nodes // 2`` nodes.
    """
    pr = model.params
    u_max = 1.0 - model.survival(pr.T)

    def default_part(m):
        x, w = np.polynomial.legendre.leggauss(m)
        u = 0.5 * u_max * (x + 1.0)
        levels = model.barrier.from_uniform(1.0 - u)
        _, sol = _solve_insider_batch(levels, model, n_steps, terminal, cap_before_default, None)
        return 0.5 * u_max * float(np.sum(w * sol.y[0])), sol.error_estimate

    fine, err_fine = default_part(n_nodes)
    coarse, _ = default_part(max(n_nodes // 2, 1))
    surv_level = pr.lam * pr.T * 2.0 + 1.0  # any level beyond lam*T
    _, surv = _solve_insider_batch(surv_level, model, n_steps, terminal, cap_before_default, None)
    survival = model.survival(pr.T) * float(surv.y[0, 0])
    u0 = pr.x0**pr.p / pr.p
    return ExAnteValue(
        value=(fine + survival) * u0,
        quadrature_error=abs(fine - coarse) * u0,
        integrator_error=max(err_fine, surv.error_estimate),
        survival_part=survival * u0,
        default_part=fine * u0,
    )


# --------------------------------------------------------------------------
# investor


def _investor_slope(nu, t, y, model: Model, K: float) -> float:
    pr = model.params
    return (pr.mu0 - (1.0 - pr.p) * pr.sigma0**2 * nu) * y - pr.lam * K * pr.gamma * (
        1.0 - nu * pr.gamma
    ) ** (pr.p - 1.0)


def investor_driver(t: float, y: float, model: Model, floor: float | None = None) -> DriverResult:
    """Maximise the investor's driver at ``(t, y)``.

    The objective is strictly concave in ``nu``; its derivative is bracketed on
    ``[-nu_max, (1-EPS)/gamma]`` (the lower end doubling until the slope turns
    positive) and its root found with Brent's method.  ``floor`` imposes
    ``nu >= -floor``.
    """
    pr = model.params
    t, y = float(t), float(y)
    K = float(capital_K(min(max(t, 0.0), pr.T), model))
    hi = (1.0 - EPS) / pr.gamma
    lo = -floor if floor is not None else -10.0 * max(1.0, abs(pr.merton_fraction))
    slope = lambda nu: _investor_slope(nu, t, y, model, K)
    if slope(hi) >= 0.0:
        nu = hi
    elif slope(lo) <= 0.0:
        if floor is not None:
            nu = lo
        else:
            while slope(lo) <= 0.0:
                lo *= 2.0
                if lo < -1e12:
                    raise RuntimeError("investor driver: could not bracket the maximiser")
            nu = brentq(slope, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    else:
        nu = brentq(slope, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    f = (
        pr.p * pr.mu0 * nu - 0.5 * pr.p * (1.0 - pr.p) * pr.sigma0**2 * nu**2 - pr.lam
    ) * y + pr.lam * K * (1.0 - nu * pr.gamma) ** pr.p
    return DriverResult(float(nu), float(f))


def solve_investor_Y(
    model: Model,
    *,
    floor: float | None = None,
    n_steps: int = 2000,
    rtol: float | None = 1e-6,
) -> ValueSolution:
    """Standard investor's value multiplier on ``[0, T]`` with ``y(T) = 1``.

    ``floor=None`` leaves short selling unbounded; pass ``model.params.delta``
    to give the investor the insider's floor.
    """
    pr = model.params

    def f(t, y):
        return investor_driver(t, y, model, floor).f_value

    sol = solve_backward(f, 1.0, 0.0, pr.T, n_steps, rtol)
    grid, Y = sol.t, sol.y
    nu = np.array([investor_driver(t, y, model, floor).nu_star for t, y in zip(grid, Y)])
    return ValueSolution(grid, Y, nu, "investor", sol.error_estimate, model)


def investor_value(model: Model, **kw) -> float:
    return solve_investor_Y(model, **kw).value


# --------------------------------------------------------------------------
# Merton


def merton_fraction_clamped(model: Model) -> float:
    pr = model.params
    return float(np.clip(pr.merton_fraction, -pr.delta, (1.0 - EPS) / pr.gamma))


def merton_policy(model: Model, n_cells: int = 1) -> Policy:
    """Default-blind Merton strategy, kept through default, then post-default Merton."""
    return Policy.constant(merton_fraction_clamped(model), model.params.T, n_cells=n_cells)


def merton_value(model: Model) -> float:
    """Expected utility of the naive Merton agent under the investor weighting."""
    return evaluate_policy(merton_policy(model), model, INVESTOR)
