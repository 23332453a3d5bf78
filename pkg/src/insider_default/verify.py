"""Oracle-versus-analytic checks run by ``insider-default verify``.

Each check returns a :class:`Check` naming what was compared, the observed
and expected quantities and the tolerance, so a failing report says exactly
what broke.  Monte Carlo bands are ``k`` standard errors and therefore widen
automatically for small ``n``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .after_default import capital_K, kbar_investor
from .before_default import (
    insider_ex_ante_value,
    merton_policy,
    solve_insider_Y,
    solve_investor_Y,
)
from .curves import value_curve
from .experiments import FIGURE2_GAMMAS, FIGURE2_LAMBDAS, FIGURE4_DELTAS, sweep_row
from .market import Model
from .market import sample_barrier
from .mc import (
    block_generator,
    estimate_capital_K,
    estimate_value,
    estimate_wealth,
    unbounded_wealth_experiment,
)
from .policy import INVESTOR, Policy, Weighting, evaluate_policy


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    observed: float
    expected: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: observed={self.observed:.9g} expected={self.expected:.9g} "
            f"tolerance={self.tolerance:.3g} ({self.seconds:.1f}s){'  ' + self.detail if self.detail else ''}"
        )


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def text(self) -> str:
        lines = [c.line() for c in self.checks]
        lines.append(f"{len(self.checks) - len(self.failures)}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class VerifyOptions:
    n: int = 100_000
    seed: int = 0
    terminal: str = "corrected"   # "over_p" injects the known terminal-condition fault
    k_sigma: float = 3.0


def _worst(name, gaps, tols, detail, observed=None, expected=None) -> Check:
    """Pass if every ``gap <= tol``; report the case closest to (or furthest past) its band."""
    gaps, tols = np.asarray(gaps, float), np.asarray(tols, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(tols > 0, gaps / tols, np.where(gaps > 0, np.inf, gaps - tols))
    i = int(np.argmax(score))
    obs = gaps[i] if observed is None else observed[i]
    exp = 0.0 if expected is None else expected[i]
    return Check(name, bool(np.all(gaps <= tols)), float(obs), float(exp), float(tols[i]), detail[i])


# --------------------------------------------------------------------------
# market model


def check_barrier_survival(model: Model, opt: VerifyOptions) -> Check:
    lam = model.params.lam
    levels = sample_barrier(block_generator(opt.seed, 0), opt.n)
    taus = model.default_time(levels)
    gaps, tols, obs, exp, det = [], [], [], [], []
    for t in (0.25, 0.5, 1.0, 2.0):
        q = math.exp(-lam * t)
        frac = float(np.mean(taus > t))
        gaps.append(abs(frac - q))
        tols.append(opt.k_sigma * math.sqrt(q * (1 - q) / opt.n))
        obs.append(frac)
        exp.append(q)
        det.append(f"t={t:g}")
    return _worst("barrier_survival_mc", gaps, tols, det, obs, exp)


# --------------------------------------------------------------------------
# after default


def check_k_formula(model: Model, opt: VerifyOptions) -> Check:
    thetas = np.linspace(0.0, model.params.T, 5)
    gaps, tols, obs, exp, det = [], [], [], [], []
    for j, th in enumerate(thetas):
        est = estimate_capital_K(th, model, n=opt.n, seed=opt.seed + j)
        K = float(capital_K(th, model))
        gaps.append(abs(est.mean - K))
        tols.append(opt.k_sigma * est.stderr)
        obs.append(est.mean)
        exp.append(K)
        det.append(f"theta={th:g}")
    return _worst("k_formula_mc", gaps, tols, det, obs, exp)


def check_kbar_ratio(model: Model, opt: VerifyOptions) -> Check:
    lam = model.params.lam
    th = np.linspace(0.0, model.params.T, 101)
    ratio = kbar_investor(th, model) / capital_K(th, model)
    ref = lam * np.exp(-lam * th)
    rel = np.abs(ratio / ref - 1.0)
    i = int(np.argmax(rel))
    return Check("kbar_ratio", bool(rel[i] < 1e-12), float(ratio[i]), float(ref[i]), 1e-12,
                 f"theta={th[i]:g} rel={rel[i]:.2e}")


def check_k_at_horizon(model: Model, opt: VerifyOptions) -> Check:
    K = float(capital_K(model.params.T, model))
    return Check("k_at_horizon", abs(K - 1.0) < 1e-15, K, 1.0, 1e-15)


# --------------------------------------------------------------------------
# before default


def _constrained_rate(model: Model) -> float:
    pr = model.params
    nu = max(pr.merton_fraction, -pr.delta)
    return pr.p * (pr.mu0 * nu - 0.5 * (1.0 - pr.p) * pr.sigma0**2 * nu**2)


def check_no_default(model: Model, opt: VerifyOptions) -> Check:
    pr = model.params
    level = 2.0 * pr.lam * pr.T + 1.0
    Y0 = solve_insider_Y(level, model, terminal=opt.terminal).Y0
    ref = math.exp(_constrained_rate(model) * pr.T)
    return Check("no_default_reduction", abs(Y0 - ref) <= 1e-8, Y0, ref, 1e-8)


def dominance_levels(model: Model) -> list[float]:
    pr = model.params
    return [0.1, 0.3, 0.6, 1.2] + [2.0 * pr.lam * pr.T + 1.0]


def policy_grid(model: Model) -> list[Policy]:
    """Five admissible constant fractions (exposed as-is at default)."""
    pr = model.params
    fractions = np.linspace(-pr.delta, 0.95 / pr.gamma, 5)
    return [Policy.constant(nu, pr.T, at_default=nu) for nu in fractions]


def check_dominance(model: Model, opt: VerifyOptions) -> list[Check]:
    u0 = model.params.x0**model.params.p / model.params.p
    dom_gap, tight_gap, det_d, det_t = [], [], [], []
    for level in dominance_levels(model):
        sol = solve_insider_Y(level, model, terminal=opt.terminal)
        V = sol.Y0 * u0
        w = Weighting.insider(level)
        best = max(evaluate_policy(pol, model, w) for pol in policy_grid(model))
        dom_gap.append(best - V)
        det_d.append(f"level={level:g} best_grid={best:.9g} V={V:.9g}")
        tight_gap.append(abs(evaluate_policy(sol.to_policy(), model, w) - V))
        det_t.append(f"level={level:g} V={V:.9g}")
    tol = [1e-6] * len(dom_gap)
    return [_worst("bsde_dominance", dom_gap, tol, det_d), _worst("bsde_tightness", tight_gap, tol, det_t)]


def check_at_default_optimality(model: Model, opt: VerifyOptions) -> Check:
    """The floor ``-delta`` beats any other admissible exposure at a known default."""
    pr = model.params
    level = 0.5 * pr.lam * pr.T
    base = solve_insider_Y(level, model, terminal=opt.terminal).to_policy()
    w = Weighting.insider(level)
    V = evaluate_policy(base, model, w)
    alts = np.linspace(-pr.delta, 0.95 / pr.gamma, 7)[1:]
    best = max(evaluate_policy(base.with_at_default(a), model, w) for a in alts)
    return Check("at_default_optimality", best <= V + 1e-12, best, V, 1e-12)


def check_ex_ante_quadrature(model: Model, opt: VerifyOptions) -> Check:
    ev = insider_ex_ante_value(model, terminal=opt.terminal)
    return Check("ex_ante_quadrature", ev.quadrature_error <= 1e-8, ev.quadrature_error, 0.0, 1e-8)


def check_investor_consistency(model: Model, opt: VerifyOptions) -> Check:
    sol = solve_investor_Y(model)
    V = evaluate_policy(sol.to_policy(), model, INVESTOR)
    return Check("investor_policy_attains_value", abs(V - sol.value) <= 1e-6, V, sol.value, 1e-6)


def check_homogeneity(model: Model, opt: VerifyOptions) -> Check:
    pol = merton_policy(model)
    c = 3.0
    v1 = evaluate_policy(pol, model)
    v2 = evaluate_policy(pol, model.with_(x0=c * model.params.x0))
    ref = c**model.params.p * v1
    return Check("p_homogeneity", abs(v2 / ref - 1.0) < 1e-12, v2, ref, 1e-12)


# --------------------------------------------------------------------------
# Monte Carlo oracle


def oracle_pairs(model: Model, terminal: str = "corrected") -> list[tuple[str, Policy, Weighting]]:
    pr = model.params
    level = 0.5 * pr.lam * pr.T
    safe = 2.0 * pr.lam * pr.T + 1.0
    return [
        ("insider-opt/default", solve_insider_Y(level, model, terminal=terminal).to_policy(), Weighting.insider(level)),
        ("insider-opt/no-default", solve_insider_Y(safe, model, terminal=terminal).to_policy(), Weighting.insider(safe)),
        ("investor-opt/investor", solve_investor_Y(model).to_policy(), INVESTOR),
        ("merton/investor", merton_policy(model), INVESTOR),
        ("constant-1/insider", Policy.constant(1.0, pr.T, at_default=-pr.delta), Weighting.insider(level)),
        ("short-floor/investor", Policy.constant(-pr.delta, pr.T), INVESTOR),
    ]


def check_oracle_pairs(model: Model, opt: VerifyOptions) -> Check:
    gaps, tols, obs, exp, det = [], [], [], [], []
    for j, (name, pol, w) in enumerate(oracle_pairs(model)):
        est = estimate_value(pol, model, w, n=opt.n, seed=opt.seed + 100 + j)
        V = evaluate_policy(pol, model, w)
        gaps.append(abs(est.mean - V))
        tols.append(opt.k_sigma * est.stderr)
        obs.append(est.mean)
        exp.append(V)
        det.append(name)
    return _worst("oracle_agreement", gaps, tols, det, obs, exp)


def terminal_discrepancy(model: Model, terminal: str, n: int, seed: int) -> tuple[float, float, float]:
    """(solver value, MC value of its own policy, stderr) for an insider with default."""
    level = 0.5 * model.params.lam * model.params.T
    sol = solve_insider_Y(level, model, terminal=terminal)
    est = estimate_value(sol.to_policy(), model, Weighting.insider(level), n=n, seed=seed)
    return sol.value, est.mean, est.stderr


def check_solution_vs_oracle(model: Model, opt: VerifyOptions) -> Check:
    V, mc, se = terminal_discrepancy(model, opt.terminal, opt.n, opt.seed + 200)
    return Check("insider_solution_vs_oracle", abs(V - mc) <= opt.k_sigma * se, V, mc, opt.k_sigma * se,
                 f"terminal={opt.terminal}")


def check_terminal_arbitration(model: Model, opt: VerifyOptions) -> Check:
    V_ok, mc_ok, se_ok = terminal_discrepancy(model, "corrected", opt.n, opt.seed + 300)
    V_bad, mc_bad, se_bad = terminal_discrepancy(model, "over_p", opt.n, opt.seed + 300)
    z_ok, z_bad = abs(V_ok - mc_ok) / se_ok, abs(V_bad - mc_bad) / se_bad
    passed = z_ok <= 3.0 and z_bad > 5.0
    return Check("terminal_arbitration", passed, z_bad, 5.0, 3.0,
                 f"corrected z={z_ok:.2f} (<=3), over_p z={z_bad:.1f} (>5)")


def check_moment_matching(model: Model, opt: VerifyOptions) -> Check:
    """E[X_T] and E[X_T^p] of three constant fractions without default."""
    pr = model.params
    w = Weighting.insider(2.0 * pr.lam * pr.T + 1.0)
    gaps, tols, obs, exp, det = [], [], [], [], []
    for j, nu in enumerate((-pr.delta, 1.0, 3.75)):
        pol = Policy.constant(nu, pr.T)
        ew = estimate_wealth(pol, model, w, n=opt.n, seed=opt.seed + 400 + j)
        ev = estimate_value(pol, model, w, n=opt.n, seed=opt.seed + 400 + j)
        for label, est, ref in (
            ("E[X]", ew, pr.x0 * math.exp(pr.mu0 * nu * pr.T)),
            ("E[U]", ev, evaluate_policy(pol, model, w)),
        ):
            gaps.append(abs(est.mean - ref))
            tols.append(opt.k_sigma * est.stderr)
            obs.append(est.mean)
            exp.append(ref)
            det.append(f"nu={nu:g} {label}")
    return _worst("mc_moment_matching", gaps, tols, det, obs, exp)


def check_post_default_identity(model: Model, opt: VerifyOptions) -> Check:
    pr = model.params
    thetas = np.linspace(0.0, pr.T, 11)
    ins = solve_insider_Y(0.5 * pr.lam * pr.T, model, terminal=opt.terminal).to_policy().post_fraction(thetas, model)
    inv = solve_investor_Y(model).to_policy().post_fraction(thetas, model)
    gap = float(np.max(np.abs(ins - inv)))
    return Check("post_default_fraction_identity", gap == 0.0, gap, 0.0, 0.0)


def check_determinism(model: Model, opt: VerifyOptions) -> Check:
    pol = merton_policy(model)
    a = estimate_value(pol, model, n=min(opt.n, 20_000), seed=opt.seed)
    b = estimate_value(pol, model, n=min(opt.n, 20_000), seed=opt.seed)
    return Check("mc_determinism", a.mean == b.mean, a.mean, b.mean, 0.0)


def check_unbounded(model: Model, opt: VerifyOptions) -> Check:
    rows = unbounded_wealth_experiment((1, 5, 25, 125), model.with_(lam=0.3, gamma=0.2), n=opt.n, seed=opt.seed)
    gaps = [rows[i + 1].mean_utility - rows[i].mean_utility for i in range(len(rows) - 1)]
    bands = [2.0 * math.hypot(rows[i + 1].stderr, rows[i].stderr) for i in range(len(rows) - 1)]
    margin = [g - b for g, b in zip(gaps, bands)]
    i = int(np.argmin(margin))
    return Check("unbounded_utility", all(m > 0 for m in margin), gaps[i], 0.0, bands[i],
                 f"psi {rows[i].psi:g}->{rows[i + 1].psi:g}; utilities "
                 + ", ".join(f"{r.mean_utility:.4g}" for r in rows))


# --------------------------------------------------------------------------
# value curves and figure shapes


def check_insider_continuity(model: Model, opt: VerifyOptions) -> Check:
    curve = value_curve(0.5 * model.params.lam * model.params.T, model, seed=opt.seed)
    j = abs(curve.jump("insider"))
    return Check("insider_no_jump_at_default", j <= 1e-9, j, 0.0, 1e-9)


def check_no_risk_coincide(model: Model, opt: VerifyOptions) -> Check:
    curve = value_curve(0.5, model.with_(lam=1e-9), seed=opt.seed)
    v = curve.values
    gap = float(max(np.max(np.abs(v["insider"] - v["investor"])), np.max(np.abs(v["insider"] - v["merton"]))))
    return Check("no_default_risk_curves_coincide", gap <= 1e-6, gap, 0.0, 1e-6)


def _series(models, floor=None):
    return np.array([sweep_row(m, 0.0, floor)[1:] for m in models])


def check_figure4(model: Model, opt: VerifyOptions) -> Check:
    base = model.with_(lam=0.3, gamma=0.5)
    ins = np.array([insider_ex_ante_value(base.with_(delta=d)).value for d in FIGURE4_DELTAS])
    drops = -np.diff(ins)
    return Check("figure4_insider_nondecreasing_in_delta", bool(np.all(drops <= 1e-12)), float(drops.max()), 0.0,
                 1e-12, "values " + ", ".join(f"{v:.6g}" for v in ins))


def check_figure2(model: Model, opt: VerifyOptions) -> list[Check]:
    series = {
        lam: _series([model.with_(lam=lam, gamma=g, delta=0.1) for g in FIGURE2_GAMMAS])
        for lam in FIGURE2_LAMBDAS
    }
    out = []
    for agent, col in (("insider", 0), ("investor", 1)):
        drops, det = [], []
        for lam, s in series.items():
            drops.append(float(np.max(-np.diff(s[:, col]))))
            det.append(f"lambda={lam:g} values " + ", ".join(f"{v:.6g}" for v in s[:, col]))
        i = int(np.argmax(drops))
        out.append(Check(f"figure2_{agent}_nondecreasing_in_gamma", max(drops) <= 1e-12, drops[i], 0.0, 1e-12,
                         det[i]))
    return out


def check_figure3(model: Model, opt: VerifyOptions) -> Check:
    m = model.with_(lam=0.5, gamma=0.5, delta=0.1)
    ins = insider_ex_ante_value(m).value
    inv = solve_investor_Y(m).value
    return Check("figure3_investor_beats_insider", inv > ins, inv, ins, 0.0)


def check_figure1(model: Model, opt: VerifyOptions) -> Check:
    m = model.with_(lam=0.3, delta=0.5, gamma=0.2)
    curve = value_curve(0.5 * m.params.lam * m.params.T, m, seed=opt.seed)
    pos = [a for a, x in curve.at_default_fraction.items() if x > 0]
    jumps = [curve.jump(a) for a in pos]
    worst = max(jumps) if jumps else -1.0
    return Check("figure1_downward_jump_with_positive_exposure", bool(pos) and worst < 0, worst, 0.0, 0.0,
                 "agents " + ", ".join(f"{a}={j:.4g}" for a, j in zip(pos, jumps)))


def check_information_dominance(model: Model, opt: VerifyOptions) -> Check:
    gaps, det = [], []
    for lam in (0.1, 0.3, 0.5):
        for g in (0.2, 0.5):
            for d in (0.1, 0.5):
                m = model.with_(lam=lam, gamma=g, delta=d)
                ins = insider_ex_ante_value(m, terminal=opt.terminal).value
                inv = solve_investor_Y(m, floor=d).value
                gaps.append(inv - ins)
                det.append(f"lambda={lam:g} gamma={g:g} delta={d:g} insider={ins:.9g} investor={inv:.9g}")
    return _worst("information_dominance", gaps, [0.0] * len(gaps), det)


CHECKS: tuple[Callable[[Model, VerifyOptions], Check | list[Check]], ...] = (
    check_barrier_survival,
    check_kbar_ratio,
    check_k_at_horizon,
    check_k_formula,
    check_no_default,
    check_dominance,
    check_at_default_optimality,
    check_ex_ante_quadrature,
    check_investor_consistency,
    check_homogeneity,
    check_oracle_pairs,
    check_solution_vs_oracle,
    check_terminal_arbitration,
    check_moment_matching,
    check_post_default_identity,
    check_determinism,
    check_unbounded,
    check_insider_continuity,
    check_no_risk_coincide,
    check_figure1,
    check_figure2,
    check_figure3,
    check_figure4,
    check_information_dominance,
)


def run_verify(model: Model, opt: VerifyOptions = VerifyOptions(), checks=CHECKS) -> Report:
    report = Report()
    for fn in checks:
        t0 = time.perf_counter()
        res = fn(model, opt)
        dt = time.perf_counter() - t0
        for c in res if isinstance(res, list) else [res]:
            report.checks.append(Check(**{**c.__dict__, "seconds": dt}))
    return report

