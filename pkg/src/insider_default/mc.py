"""Monte Carlo oracle for deterministic strategies under the default model.

Wealth is simulated exactly in distribution: on every cell with a constant
fraction the log-increment is Gaussian, and for a deterministic integrand the
sum of the cell increments is again Gaussian with the summed mean and
variance.  ``per_cell=True`` draws each cell's Brownian increment as well,
which is slower but needs no aggregation argument.

Random numbers come from Philox streams keyed by ``(seed, block index)``
with a fixed block size, so results do not depend on how blocks are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market import Model, after_default_coeffs
from .policy import INVESTOR, Policy, Weighting, jump_factor

BLOCK = 8192
#: Smallest sample count accepted by the estimators.
MIN_SAMPLES = 1000


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int
    seed: int

    def within(self, value: float, k: float = 3.0) -> bool:
        return abs(self.mean - value) <= k * self.stderr


@dataclass(frozen=True, eq=False)
class PathSample:
    default_time: float | None
    terminal_wealth: float
    utility: float
    times: np.ndarray | None = None
    wealth: np.ndarray | None = None


def block_generator(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(ss))


def _blocks(n: int, seed: int):
    for b, start in enumerate(range(0, n, BLOCK)):
        yield block_generator(seed, b), min(BLOCK, n - start)


def _check_n(n: int) -> None:
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n}")


def _estimate(samples: np.ndarray, seed: int) -> McEstimate:
    n = samples.size
    return McEstimate(float(np.mean(samples)), float(np.std(samples, ddof=1) / np.sqrt(n)), n, seed)


def utility(x, p: float):
    return np.asarray(x, dtype=float) ** p / p


# --------------------------------------------------------------------------
# single paths


def brownian_increments(times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal(times.size - 1) * np.sqrt(np.diff(times))


def wealth_path(
    policy: Policy,
    model: Model,
    times: np.ndarray,
    dW: np.ndarray,
    default_time: float | None,
    *,
    post_fraction: float | None = None,
) -> np.ndarray:
    """Wealth along a given Brownian path sampled at ``times``.

    ``default_time`` must be one of ``times`` (or ``None``).  The value stored
    at the default time is the post-jump wealth.  ``post_fraction``
    overrides the policy's own post-default rule.
    """
    pr = model.params
    times = np.asarray(times, dtype=float)
    X = np.empty(times.size)
    X[0] = pr.x0
    theta = default_time
    if theta is not None:
        mu1, sigma1 = after_default_coeffs(theta, model)
        nu1 = policy.post_fraction(theta, model) if post_fraction is None else post_fraction
    for i in range(times.size - 1):
        t0, t1 = times[i], times[i + 1]
        dt = t1 - t0
        if theta is None or t1 <= theta:
            nu = policy.fraction(t1)
            mu, sig = pr.mu0, pr.sigma0
        else:
            nu, mu, sig = nu1, mu1, sigma1
        X[i + 1] = X[i] * np.exp((mu * nu - 0.5 * (sig * nu) ** 2) * dt + sig * nu * dW[i])
        if theta is not None and t1 == theta:
            X[i + 1] *= 1.0 - policy.jump_fraction(theta) * pr.gamma
    return X


def simulate_wealth(policy: Policy, model: Model, default_time: float | None, seed: int) -> PathSample:
    """One wealth trajectory on the policy grid (plus the default time, if any).

    Raises
    ------
    InadmissiblePolicy
        If the jump factor at default is not positive.
    """
    pr = model.params
    if default_time is not None and default_time > pr.T:
        default_time = None
    policy = policy.extended_to(pr.T)
    times = policy.grid[policy.grid <= pr.T]
    if default_time is not None:
        jump_factor(policy, model, default_time)  # admissibility check
        times = np.union1d(times, [default_time])
    dW = brownian_increments(times, block_generator(seed, 0))
    X = wealth_path(policy, model, times, dW, default_time)
    return PathSample(default_time, float(X[-1]), float(utility(X[-1], pr.p)), times, X)


# --------------------------------------------------------------------------
# terminal wealth samples


def _segment_moments(policy: Policy, model: Model, t):
    """Drift and variance integrals of log-wealth on ``[0, t]`` before default."""
    pr = model.params
    nu = policy.nu
    drift = pr.mu0 * nu - 0.5 * (pr.sigma0 * nu) ** 2
    var = (pr.sigma0 * nu) ** 2
    dt = np.diff(policy.grid)
    c_drift = np.concatenate(([0.0], np.cumsum(drift * dt)))
    c_var = np.concatenate(([0.0], np.cumsum(var * dt)))
    i = policy.cell(t)
    tau = np.asarray(t, dtype=float) - policy.grid[i]
    return c_drift[i] + drift[i] * tau, c_var[i] + var[i] * tau


def _log_pre_default(policy, model, t, rng, size, per_cell):
    if not per_cell:
        m, v = _segment_moments(policy, model, t)
        return m + np.sqrt(v) * rng.standard_normal(size)
    pr = model.params
    t = np.broadcast_to(np.asarray(t, dtype=float), (size,))
    out = np.zeros(size)
    for i, nu in enumerate(policy.nu):
        a, b = policy.grid[i], policy.grid[i + 1]
        dt = np.clip(t, a, b) - a
        z = rng.standard_normal(size)
        out += (pr.mu0 * nu - 0.5 * (pr.sigma0 * nu) ** 2) * dt + pr.sigma0 * nu * np.sqrt(dt) * z
    return out


def _log_post_default(policy, model, theta, rng, size):
    pr = model.params
    mu1, sigma1 = after_default_coeffs(theta, model)
    nu1 = policy.post_fraction(theta, model)
    h = pr.T - np.asarray(theta, dtype=float)
    z = rng.standard_normal(size)
    return (np.asarray(mu1) * nu1 - 0.5 * (np.asarray(sigma1) * nu1) ** 2) * h + np.asarray(
        sigma1
    ) * nu1 * np.sqrt(h) * z


def _default_branch_wealth(policy, model, theta, rng, size, per_cell):
    pr = model.params
    log_x = _log_pre_default(policy, model, theta, rng, size, per_cell)
    jump_factor(policy, model, theta)  # admissibility check
    jump = 1.0 - np.asarray(policy.jump_fraction(theta), dtype=float) * pr.gamma
    return pr.x0 * np.exp(log_x) * jump * np.exp(_log_post_default(policy, model, theta, rng, size))


def terminal_samples(
    policy: Policy,
    model: Model,
    weighting: Weighting,
    n: int,
    seed: int,
    *,
    per_cell: bool = False,
):
    """Terminal-wealth samples and per-sample weights.

    Insider weighting: one branch (default at ``l / lam`` or none).  Investor
    weighting: each sample carries the survival branch with weight
    ``P(tau > T)`` and the default branch with a default time drawn from the
    law of ``tau`` conditioned on ``tau <= T``.  Returns ``(survive, default,
    w_survive, w_default)``; a branch that cannot occur is ``None``.
    """
    pr = model.params
    policy = policy.extended_to(pr.T)
    surv_chunks, def_chunks = [], []
    if weighting.kind == "insider":
        theta = model.default_time(weighting.barrier)
        for rng, size in _blocks(n, seed):
            if theta > pr.T:
                surv_chunks.append(pr.x0 * np.exp(_log_pre_default(policy, model, pr.T, rng, size, per_cell)))
            else:
                def_chunks.append(_default_branch_wealth(policy, model, theta, rng, size, per_cell))
        if theta > pr.T:
            return np.concatenate(surv_chunks), None, 1.0, 0.0
        return None, np.concatenate(def_chunks), 0.0, 1.0
    if weighting.kind != "investor":
        raise ValueError(f"unknown weighting {weighting.kind!r}")
    w_surv = float(model.survival(pr.T))
    for rng, size in _blocks(n, seed):
        # default time given tau <= T, by inverting the conditional CDF
        u = rng.random(size)
        theta = -np.log1p(-u * (1.0 - w_surv)) / pr.lam
        theta = np.minimum(theta, pr.T)
        def_chunks.append(_default_branch_wealth(policy, model, theta, rng, size, per_cell))
        surv_chunks.append(pr.x0 * np.exp(_log_pre_default(policy, model, pr.T, rng, size, per_cell)))
    return np.concatenate(surv_chunks), np.concatenate(def_chunks), w_surv, 1.0 - w_surv


def _combine(values_surv, values_def, w_surv, w_def):
    if values_surv is None:
        return w_def * values_def
    if values_def is None:
        return w_surv * values_surv
    return w_surv * values_surv + w_def * values_def


def estimate_value(
    policy: Policy,
    model: Model,
    weighting: Weighting = INVESTOR,
    n: int = 100_000,
    seed: int = 0,
    *,
    per_cell: bool = False,
) -> McEstimate:
    """Monte Carlo estimate of ``E[U(X_T)]`` under ``weighting``."""
    _check_n(n)
    p = model.params.p
    xs, xd, ws, wd = terminal_samples(policy, model, weighting, n, seed, per_cell=per_cell)
    u = _combine(None if xs is None else utility(xs, p), None if xd is None else utility(xd, p), ws, wd)
    return _estimate(u, seed)


def estimate_wealth(
    policy: Policy, model: Model, weighting: Weighting = INVESTOR, n: int = 100_000, seed: int = 0
) -> McEstimate:
    _check_n(n)
    xs, xd, ws, wd = terminal_samples(policy, model, weighting, n, seed)
    return _estimate(_combine(xs, xd, ws, wd), seed)


def estimate_capital_K(theta: float, model: Model, n: int = 100_000, seed: int = 0) -> McEstimate:
    """``(E[Z_T^(p/(p-1))])^(1-p)`` for the post-default state-price density ``Z``.

    The standard error is propagated from the inner mean by the delta method.
    """
    _check_n(n)
    pr = model.params
    mu1, sigma1 = after_default_coeffs(theta, model)
    r = mu1 / sigma1
    h = pr.T - theta
    q = pr.p / (pr.p - 1.0)
    chunks = []
    for rng, size in _blocks(n, seed):
        dW = np.sqrt(h) * rng.standard_normal(size)
        Z = np.exp(-r * dW - 0.5 * r * r * h)
        chunks.append(Z**q)
    inner = _estimate(np.concatenate(chunks), seed)
    K = inner.mean ** (1.0 - pr.p)
    se = (1.0 - pr.p) * inner.mean ** (-pr.p) * inner.stderr
    return McEstimate(float(K), float(se), n, seed)


# --------------------------------------------------------------------------
# unbounded wealth without a short-sale floor


@dataclass(frozen=True)
class UnboundedRow:
    psi: float
    mean_wealth: float
    mean_utility: float
    stderr: float
    wealth_stderr: float


def bet_on_default_policy(psi: float, level: float, eta: float, model: Model) -> Policy:
    """Short ``psi`` between the times the intensity hits ``level - eta`` and ``level``.

    The position is flat before, and liquidated after the default.
    """
    pr = model.params
    t_on = model.default_time(level - eta)
    t_off = model.default_time(level)
    if not 0.0 < t_on < t_off <= pr.T:
        raise ValueError("need 0 < level - eta < level <= lam * T")
    grid = np.array([0.0, t_on, t_off] + ([pr.T] if t_off < pr.T else []))
    nu = np.array([0.0, -psi] + ([0.0] if t_off < pr.T else []))
    return Policy(grid, nu, at_default=-psi, post_default=0.0)


def unbounded_wealth_experiment(
    psis,
    model: Model,
    *,
    level: float | None = None,
    eta_frac: float = 0.05,
    n: int = 100_000,
    seed: int = 0,
) -> list[UnboundedRow]:
    """Terminal wealth and utility of the bet-on-default strategy for each ``psi``.

    ``level`` defaults to ``0.1 * lam * T`` (default at a tenth of the
    horizon); the short window opens when the intensity reaches
    ``(1 - eta_frac) * level``.  All ``psi`` share the random stream.
    """
    _check_n(n)
    pr = model.params
    level = 0.1 * pr.lam * pr.T if level is None else float(level)
    eta = eta_frac * level
    w = Weighting.insider(level)
    rows = []
    for psi in psis:
        psi = float(psi)
        if psi == 0.0:
            policy = Policy.constant(0.0, pr.T, at_default=0.0, post_default=0.0)
        else:
            policy = bet_on_default_policy(psi, level, eta, model)
        xs, xd, ws, wd = terminal_samples(policy, model, w, n, seed)
        x = _combine(xs, xd, ws, wd)
        u = utility(x, pr.p)
        eu, ex = _estimate(u, seed), _estimate(x, seed)
        rows.append(UnboundedRow(psi, ex.mean, eu.mean, eu.stderr, ex.stderr))
    return rows
