import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from insider_default.after_default import capital_K
from insider_default.market import ModelParams, validate
from insider_default.policy import (
    INVESTOR,
    InadmissiblePolicy,
    Policy,
    Weighting,
    evaluate_policy,
    log_moment,
    survival_multipliers,
)


def test_zero_policy_investor_closed_form(model):
    lam, T = model.params.lam, model.params.T
    integral, _ = quad(lambda th: lam * math.exp(-lam * th) * capital_K(th, model), 0.0, T)
    expected = 1.25 * (math.exp(-lam * T) + integral)
    assert evaluate_policy(Policy.constant(0.0, T), model, INVESTOR) == pytest.approx(expected, rel=1e-12)


def test_zero_policy_without_default_risk():
    m = validate(ModelParams(lam=1e-12))
    assert evaluate_policy(Policy.constant(0.0, 1.0), m) == pytest.approx(1.25, rel=1e-10)


def test_merton_insider_no_default(model):
    v = evaluate_policy(Policy.constant(3.75, 1.0), model, Weighting.insider(1.0))
    assert v == pytest.approx(1.25 * math.exp(0.045), rel=1e-14)


def test_log_moment_piecewise(model):
    pol = Policy(np.array([0.0, 0.4, 1.0]), np.array([1.0, -0.5]))
    g = lambda nu: 0.8 * (0.03 * nu - 0.1 * 0.04 * nu**2)
    assert log_moment(pol, model, 1.0) == pytest.approx(0.4 * g(1.0) + 0.6 * g(-0.5), rel=1e-14)
    assert log_moment(pol, model, 0.2) == pytest.approx(0.2 * g(1.0), rel=1e-14)


def test_cells_are_left_open(model):
    pol = Policy(np.array([0.0, 0.5, 1.0]), np.array([1.0, 2.0]))
    assert pol.fraction(0.5) == 1.0  # (0, 0.5] holds the first fraction
    assert pol.fraction(0.5 + 1e-12) == 2.0
    assert pol.jump_fraction(0.5) == 1.0
    assert pol.with_at_default(-0.5).jump_fraction(0.5) == -0.5


def test_inadmissible_jump_raises(model):
    pol = Policy.constant(5.0, 1.0)  # nu * gamma = 1
    with pytest.raises(InadmissiblePolicy):
        evaluate_policy(pol, model, Weighting.insider(0.15))


def test_unbounded_long_fine_without_default(model):
    assert evaluate_policy(Policy.constant(8.0, 1.0), model, Weighting.insider(1.0)) > 0


def test_survival_multiplier_at_zero_is_value(model):
    pol = Policy.constant(1.0, 1.0, n_cells=7)
    mult = survival_multipliers(pol, model)
    assert mult[0] * 1.25 == pytest.approx(evaluate_policy(pol, model), rel=1e-12)
    assert mult[-1] == pytest.approx(1.0)


@settings(max_examples=40)
@given(st.floats(-0.5, 4.5), st.floats(-0.5, 4.5), st.floats(0.1, 0.9), st.floats(0.0, 1.2))
def test_at_default_floor_never_hurts(nu_a, nu_b, split, level):
    """Swapping the at-default exposure for -delta never lowers the value."""
    m = validate(ModelParams())
    pol = Policy(np.array([0.0, split, 1.0]), np.array([nu_a, nu_b]))
    for w in (Weighting.insider(level), INVESTOR):
        assert evaluate_policy(pol.with_at_default(-m.params.delta), m, w) >= evaluate_policy(pol, m, w) - 1e-14


@settings(max_examples=30)
@given(st.floats(-2.0, 4.0), st.floats(0.1, 50.0))
def test_value_homogeneous_in_wealth(nu, c):
    m = validate(ModelParams())
    pol = Policy.constant(nu, 1.0)
    v1 = evaluate_policy(pol, m)
    vc = evaluate_policy(pol, m.with_(x0=c))
    assert vc == pytest.approx(c**0.8 * v1, rel=1e-12)


def test_investor_quadrature_matches_scipy(model):
    pol = Policy(np.array([0.0, 0.3, 1.0]), np.array([2.0, -0.4]), at_default=0.5)
    lam = model.params.lam
    from insider_default.policy import default_branch

    integrand = lambda th: lam * math.exp(-lam * th) * float(default_branch(pol, model, th))
    tail = sum(quad(integrand, a, b, epsabs=1e-14)[0] for a, b in ((0, 0.3), (0.3, 1.0)))
    expected = (math.exp(-lam) * math.exp(float(log_moment(pol, model, 1.0))) + tail) * 1.25
    assert evaluate_policy(pol, model) == pytest.approx(expected, rel=1e-12)
