"""Closed-form after-default problem for CRRA utility.

Once the counterparty has defaulted the market is complete with
deterministic coefficients ``mu1(theta), sigma1(theta)``, so the optimal
value is ``K * x**p / p`` with

    K(theta) = exp(0.5 * p / (1 - p) * (mu1 / sigma1)**2 * (T - theta)).

Both agents observe the default, hence they share the optimal post-default
fraction.  The investor's value differs from the insider's by the density of
the default time, ``lam * exp(-lam * theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market import Model, after_default_coeffs


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def market_price_of_risk(theta, model: Model):
    mu1, sigma1 = after_default_coeffs(theta, model)
    return _out(np.asarray(mu1) / np.asarray(sigma1))


def remaining_K(theta, t, model: Model):
    """Multiplier for the horizon ``[t, T]`` left after a default at ``theta <= t``."""
    p, T = model.params.p, model.params.T
    r = np.asarray(market_price_of_risk(theta, model))
    horizon = np.maximum(T - np.asarray(t, dtype=float), 0.0)
    return _out(np.exp(0.5 * p / (1.0 - p) * r**2 * horizon))


def capital_K(theta, model: Model):
    """After-default value multiplier ``K(theta) >= 1`` for default time ``theta``."""
    return remaining_K(theta, theta, model)


def v1_insider(theta, x, model: Model):
    """After-default value ``K(theta) * x**p / p`` at wealth ``x`` right after default."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("wealth at default must be positive")
    p = model.params.p
    return _out(np.asarray(capital_K(theta, model)) * x**p / p)


def kbar_investor(theta, model: Model):
    """Investor multiplier: ``K`` weighted by the default-time density."""
    return _out(np.asarray(model.default_density(theta)) * np.asarray(capital_K(theta, model)))


def merton_fraction_after(theta, model: Model):
    """Optimal post-default fraction ``mu1 / ((1 - p) sigma1**2)``."""
    mu1, sigma1 = after_default_coeffs(theta, model)
    return _out(np.asarray(mu1) / ((1.0 - model.params.p) * np.asarray(sigma1) ** 2))


@dataclass(frozen=True)
class AfterDefaultValue:
    theta: float
    K: float
    Kbar: float
    merton_fraction: float


def after_default_value(theta: float, model: Model) -> AfterDefaultValue:
    return AfterDefaultValue(
        theta=float(theta),
        K=capital_K(theta, model),
        Kbar=kbar_investor(theta, model),
        merton_fraction=merton_fraction_after(theta, model),
    )
