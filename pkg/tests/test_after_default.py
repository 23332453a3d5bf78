import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from insider_default.after_default import (
    after_default_value,
    capital_K,
    kbar_investor,
    merton_fraction_after,
    remaining_K,
    v1_insider,
)
from insider_default.market import AfterDefaultProfile, ModelParams, validate
from insider_default.mc import estimate_capital_K, estimate_value
from insider_default.policy import Policy, Weighting, evaluate_policy

THETAS = np.linspace(0.0, 1.0, 41)


def test_K_examples(model):
    assert capital_K(1.0, model) == 1.0
    assert capital_K(0.0, model) == 1.0
    assert capital_K(0.5, model) == pytest.approx(math.exp(0.0025), rel=1e-15)


def test_K_at_least_one(model):
    assert np.all(capital_K(THETAS, model) >= 1.0)


def test_remaining_K_reduces_to_K(model):
    assert remaining_K(0.3, 0.3, model) == capital_K(0.3, model)
    assert remaining_K(0.3, 1.0, model) == 1.0


def test_v1_examples(model):
    assert v1_insider(1.0, 1.0, model) == pytest.approx(1.25)
    assert v1_insider(0.5, 1.0, model) == pytest.approx(1.25 * math.exp(0.0025))
    with pytest.raises(ValueError):
        v1_insider(0.5, 0.0, model)


@given(st.floats(0.0, 1.0), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_v1_homogeneous(theta, x, c):
    m = validate(ModelParams())
    assert v1_insider(theta, c * x, m) == pytest.approx(c**m.params.p * v1_insider(theta, x, m), rel=1e-12)


def test_kbar_examples(model):
    assert kbar_investor(0.0, model) == pytest.approx(0.3, rel=1e-15)
    assert kbar_investor(1.0, model) == pytest.approx(0.3 * math.exp(-0.3), rel=1e-15)


@given(st.floats(0.0, 1.0), st.floats(0.05, 0.95), st.floats(0.01, 3.0))
def test_kbar_ratio_exact(theta, p, lam):
    m = validate(ModelParams(p=p, lam=lam))
    ratio = kbar_investor(theta, m) / capital_K(theta, m)
    assert abs(ratio / (lam * math.exp(-lam * theta)) - 1.0) < 1e-12


def test_kbar_ratio_profile_free():
    prof = AfterDefaultProfile.table([0.0, 0.5, 1.0], [0.01, 0.05, 0.02], [0.5, 0.1, 0.3])
    m = validate(ModelParams(), prof)
    ratio = kbar_investor(THETAS, m) / capital_K(THETAS, m)
    np.testing.assert_allclose(ratio, 0.3 * np.exp(-0.3 * THETAS), rtol=1e-12)


def test_post_default_fraction_examples(model):
    assert merton_fraction_after(0.0, model) == 0.0
    assert merton_fraction_after(1.0, model) == pytest.approx(3.75)
    near_one = validate(ModelParams(p=1 - 1e-9))
    assert merton_fraction_after(1.0, near_one) > 1e7


def test_post_default_fraction_is_best_constant(model):
    """A common-seed grid search over constant post-default fractions peaks at nu1."""
    theta = 0.5
    w = Weighting.insider(theta * model.params.lam)
    nu1 = merton_fraction_after(theta, model)
    grid = np.linspace(0.0, 2.0 * nu1, 9)
    merton = Policy.constant(0.0, 1.0, at_default=0.0)
    assert evaluate_policy(merton, model, w) == pytest.approx(capital_K(theta, model) / model.params.p, rel=1e-14)
    mc = []
    for alt in grid:
        alt_pol = Policy.constant(0.0, 1.0, at_default=0.0, post_default=float(alt))
        assert evaluate_policy(alt_pol, model, w) <= evaluate_policy(merton, model, w) + 1e-15
        mc.append(estimate_value(alt_pol, model, w, n=200_000, seed=1).mean)
    assert grid[int(np.argmax(mc))] == pytest.approx(nu1)


def test_after_default_value_bundle(model):
    v = after_default_value(0.5, model)
    assert v.Kbar == pytest.approx(v.K * 0.3 * math.exp(-0.15))
    assert v.merton_fraction == pytest.approx(0.015 / (0.2 * 0.09))


@pytest.mark.parametrize("theta", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_K_matches_state_price_monte_carlo(model, theta):
    est = estimate_capital_K(theta, model, n=100_000, seed=11)
    assert est.within(capital_K(theta, model), 3.0)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 1.0))
def test_K_monte_carlo_any_theta(theta):
    m = validate(ModelParams())
    assert estimate_capital_K(theta, m, n=20_000, seed=5).within(capital_K(theta, m), 4.0)
