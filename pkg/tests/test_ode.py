import math

import numpy as np
import pytest

from insider_default.ode import IntegrationError, rk4_backward, solve_backward


def test_linear_ode_exact():
    sol = solve_backward(lambda t, y: 0.045 * y, 1.0, 0.0, 1.0, n_steps=200)
    assert sol.y[0] == pytest.approx(math.exp(0.045), abs=1e-12)
    assert sol.t[0] == 0.0 and sol.t[-1] == 1.0
    assert sol.error_estimate < 1e-12


def test_batched_per_component_grids():
    t_end = np.array([0.0, 0.5, 1.0])
    sol = solve_backward(lambda t, y: 0.1 * y, np.ones(3), np.zeros(3), t_end, n_steps=100)
    np.testing.assert_allclose(sol.y[0], np.exp(0.1 * t_end), rtol=1e-12)
    np.testing.assert_allclose(sol.t[:, 1], np.linspace(0.0, 0.5, 101))


def test_time_dependent_driver():
    # y' = -2t  with y(1) = 0  gives y(0) = 1
    ts, ys = rk4_backward(lambda t, y: 2.0 * t + 0.0 * y, 0.0, 0.0, 1.0, 10)
    assert ys[0] == pytest.approx(1.0, abs=1e-14)


def test_tolerance_violation_raises():
    with pytest.raises(IntegrationError) as err:
        solve_backward(lambda t, y: 50.0 * y, 1.0, 0.0, 1.0, n_steps=4, rtol=1e-6)
    assert err.value.error_estimate > 1e-6


def test_odd_steps_rejected():
    with pytest.raises(ValueError):
        solve_backward(lambda t, y: y, 1.0, 0.0, 1.0, n_steps=3)
