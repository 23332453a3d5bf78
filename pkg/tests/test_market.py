import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from insider_default.market import (
    AfterDefaultProfile,
    ModelParams,
    ModelValidationError,
    after_default_coeffs,
    check_params,
    load_config,
    model_from_mapping,
    sample_barrier,
    tau_of_barrier,
    validate,
)
from insider_default.mc import block_generator


def test_base_params_validate():
    assert check_params(ModelParams()) == []


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"gamma": 1.0}, "gamma must lie in (0,1)"),
        ({"sigma0": 0.0}, "sigma0 must be positive"),
        ({"p": 1.0}, "p must lie in (0,1)"),
        ({"lam": 0.0}, "lambda must be positive"),
        ({"delta": -0.1}, "delta must be non-negative"),
        ({"x0": 0.0}, "x0 must be positive"),
    ],
)
def test_invalid_params_are_named(changes, message):
    with pytest.raises(ModelValidationError) as err:
        validate(ModelParams().with_(**changes))
    assert any(message in e for e in err.value.errors)


def test_all_errors_reported_at_once():
    with pytest.raises(ModelValidationError) as err:
        validate(ModelParams(gamma=1.0, sigma0=0.0))
    assert len(err.value.errors) == 2


def test_nan_rejected():
    assert check_params(ModelParams(mu0=float("nan")))


@pytest.mark.parametrize("level, theta", [(0.3, 1.0), (0.0, 0.0), (0.15, 0.5)])
def test_tau_examples(level, theta):
    assert tau_of_barrier(level, 0.3) == pytest.approx(theta, abs=1e-15)


def test_tau_rejects_bad_input():
    with pytest.raises(ValueError):
        tau_of_barrier(-0.1, 0.3)
    with pytest.raises(ValueError):
        tau_of_barrier(0.1, 0.0)


@given(
    st.floats(0.0, 10.0), st.floats(1e-3, 5.0), st.floats(1e-3, 5.0), st.floats(1e-3, 5.0)
)
def test_tau_monotone(level, dl, lam, dlam):
    assert tau_of_barrier(level + dl, lam) > tau_of_barrier(level, lam)
    if level > 0:
        assert tau_of_barrier(level, lam + dlam) < tau_of_barrier(level, lam)


@pytest.mark.parametrize("theta, expected", [(0.0, (0.0, 0.4)), (1.0, (0.03, 0.2)), (0.5, (0.015, 0.3))])
def test_after_default_coeff_examples(model, theta, expected):
    mu1, s1 = after_default_coeffs(theta, model)
    assert mu1 == pytest.approx(expected[0], abs=1e-15)
    assert s1 == pytest.approx(expected[1], abs=1e-15)


@given(st.floats(0.0, 1.0))
def test_linear_profile_ratios_exact(theta):
    m = validate(ModelParams())
    mu1, s1 = after_default_coeffs(theta, m)
    assert mu1 / m.params.mu0 == pytest.approx(theta / m.params.T, rel=1e-15, abs=1e-300)
    assert s1 / m.params.sigma0 == pytest.approx(2.0 - theta / m.params.T, rel=1e-15)


def test_coeffs_outside_horizon_rejected(model):
    with pytest.raises(ValueError):
        after_default_coeffs(1.5, model)


def test_custom_table_interpolates():
    prof = AfterDefaultProfile.table([0.0, 1.0], [0.0, 0.02], [0.3, 0.1])
    m = validate(ModelParams(), prof)
    mu1, s1 = after_default_coeffs(0.25, m)
    assert (mu1, s1) == pytest.approx((0.005, 0.25))


def test_custom_table_needs_positive_sigma():
    prof = AfterDefaultProfile.table([0.0, 1.0], [0.0, 0.02], [0.3, 0.0])
    with pytest.raises(ModelValidationError, match="sigma1"):
        validate(ModelParams(), prof)


def test_barrier_inverse_cdf():
    law = validate(ModelParams()).barrier
    assert law.from_uniform(0.5) == pytest.approx(0.693147, abs=1e-6)
    assert law.from_uniform(1.0 - 1e-12) == pytest.approx(0.0, abs=1e-11)


def test_barrier_sample_mean():
    n = 100_000
    levels = sample_barrier(block_generator(7, 0), n)
    assert np.all(levels >= 0)
    assert abs(levels.mean() - 1.0) <= 3.0 / math.sqrt(n)


def test_survival_of_sampled_default_times():
    m = validate(ModelParams())
    n = 100_000
    tau = m.default_time(sample_barrier(block_generator(3, 0), n))
    for t in (0.5, 1.0, 3.0):
        q = math.exp(-m.params.lam * t)
        assert abs(np.mean(tau > t) - q) <= 3.0 * math.sqrt(q * (1 - q) / n)


def test_config_roundtrip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"lambda": 0.5, "gamma": 0.5, "profile.kind": "paper-linear"}))
    m = model_from_mapping(load_config(path))
    assert (m.params.lam, m.params.gamma) == (0.5, 0.5)
    assert model_from_mapping(m.params.as_config()).params == m.params


def test_config_rejects_unknown_key():
    with pytest.raises(ModelValidationError, match="unknown configuration key"):
        model_from_mapping({"lamda": 0.3})


def test_config_custom_table():
    m = model_from_mapping({"profile.kind": "custom-table", "profile.table": [[0, 0, 0.4], [1, 0.03, 0.2]]})
    assert after_default_coeffs(0.5, m) == pytest.approx((0.015, 0.3))


@settings(max_examples=25)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_with_accepts_lambda_alias(lam, gamma):
    p = ModelParams().with_(**{"lambda": lam, "gamma": gamma})
    assert p.lam == lam and p.gamma == gamma
