"""Market model: parameters, after-default coefficient profile and barrier law.

The counterparty defaults when the cumulated intensity ``lam * t`` first
reaches a random barrier ``L``.  With a constant intensity the barrier is
standard exponential, and an insider who knows ``L = l`` knows the default
time ``l / lam`` in advance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

#: Keys accepted in a configuration document (``profile.kind`` is handled apart).
CONFIG_KEYS = ("mu0", "sigma0", "gamma", "T", "p", "delta", "lambda", "x0")


class ModelValidationError(ValueError):
    """Raised by :func:`validate`; ``errors`` lists every violated bound."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ModelParams:
    """Market, preference and constraint scalars.

    ``lam`` is the default intensity (``lambda`` in configuration files).
    Defaults: drift 3%, volatility 20%, loss fraction 20% at default,
    unit horizon and CRRA exponent 0.8.
    """

    mu0: float = 0.03
    sigma0: float = 0.2
    gamma: float = 0.2
    T: float = 1.0
    p: float = 0.8
    delta: float = 0.5
    lam: float = 0.3
    x0: float = 1.0

    def with_(self, **changes: float) -> "ModelParams":
        if "lambda" in changes:
            changes["lam"] = changes.pop("lambda")
        return replace(self, **changes)

    def as_config(self) -> dict[str, float]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["lambda"] = out.pop("lam")
        return out

    @property
    def merton_fraction(self) -> float:
        """Unconstrained default-free optimal fraction mu0 / ((1-p) sigma0^2)."""
        return self.mu0 / ((1.0 - self.p) * self.sigma0**2)


@dataclass(frozen=True)
class AfterDefaultProfile:
    """Post-default drift and volatility as functions of the default time.

    ``kind="paper-linear"`` uses ``mu1 = mu0 * theta / T`` and
    ``sigma1 = sigma0 * (2 - theta / T)``.  ``kind="custom-table"`` linearly
    interpolates a table of ``(theta, mu1, sigma1)`` rows.
    """

    kind: str = "paper-linear"
    theta: tuple[float, ...] = ()
    mu1: tuple[float, ...] = ()
    sigma1: tuple[float, ...] = ()

    @classmethod
    def table(cls, theta, mu1, sigma1) -> "AfterDefaultProfile":
        return cls(
            "custom-table",
            tuple(float(v) for v in theta),
            tuple(float(v) for v in mu1),
            tuple(float(v) for v in sigma1),
        )

    def coeffs(self, theta, params: ModelParams):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "paper-linear":
            ratio = theta / params.T
            mu1 = params.mu0 * ratio
            sigma1 = params.sigma0 * (2.0 - ratio)
        else:
            mu1 = np.interp(theta, self.theta, self.mu1)
            sigma1 = np.interp(theta, self.theta, self.sigma1)
        if mu1.ndim == 0:
            return float(mu1), float(sigma1)
        return mu1, sigma1


@dataclass(frozen=True)
class BarrierLaw:
    """Law of the default barrier; only the unit exponential is supported."""

    kind: str = "exponential-unit"

    def density(self, level):
        level = np.asarray(level, dtype=float)
        out = np.where(level >= 0.0, np.exp(-np.abs(level)), 0.0)
        return float(out) if out.ndim == 0 else out

    def survival(self, level):
        """P(L > level)."""
        level = np.asarray(level, dtype=float)
        out = np.exp(-np.maximum(level, 0.0))
        return float(out) if out.ndim == 0 else out

    def from_uniform(self, u):
        """Inverse-CDF map: ``u`` in (0, 1] to a barrier level ``-log(u)``."""
        u = np.asarray(u, dtype=float)
        out = -np.log(u)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Model:
    """A validated configuration.  Build it with :func:`validate`."""

    params: ModelParams
    profile: AfterDefaultProfile = field(default_factory=AfterDefaultProfile)
    barrier: BarrierLaw = field(default_factory=BarrierLaw)

    def with_(self, **changes: float) -> "Model":
        return validate(self.params.with_(**changes), self.profile)

    def default_time(self, level):
        return tau_of_barrier(level, self.params.lam)

    def default_density(self, theta):
        """Density of the default time: lam * g0(lam * theta)."""
        lam = self.params.lam
        return lam * self.barrier.density(lam * np.asarray(theta, dtype=float))

    def survival(self, t):
        """P(tau > t) = P(L > lam * t)."""
        return self.barrier.survival(self.params.lam * np.asarray(t, dtype=float))


def check_params(params: ModelParams, profile: AfterDefaultProfile | None = None) -> list[str]:
    """Return a message for every violated invariant (empty when valid)."""
    errors = []

    def bad(value) -> bool:
        return not (isinstance(value, (int, float)) and math.isfinite(value))

    for f in fields(params):
        value = getattr(params, f.name)
        if bad(value):
            errors.append(f"{f.name} must be a finite number, got {value!r}")
    if errors:
        return errors
    if not 0.0 < params.gamma < 1.0:
        errors.append(f"gamma must lie in (0,1), got {params.gamma!r}")
    if not 0.0 < params.p < 1.0:
        errors.append(f"p must lie in (0,1), got {params.p!r}")
    if params.sigma0 <= 0.0:
        errors.append(f"sigma0 must be positive, got {params.sigma0!r}")
    if params.T <= 0.0:
        errors.append(f"T must be positive, got {params.T!r}")
    if params.lam <= 0.0:
        errors.append(f"lambda must be positive, got {params.lam!r}")
    if params.x0 <= 0.0:
        errors.append(f"x0 must be positive, got {params.x0!r}")
    if params.delta < 0.0:
        errors.append(f"delta must be non-negative, got {params.delta!r}")

    profile = profile or AfterDefaultProfile()
    if profile.kind == "custom-table":
        n = len(profile.theta)
        if n == 0 or len(profile.mu1) != n or len(profile.sigma1) != n:
            errors.append("profile table needs equal-length, non-empty theta/mu1/sigma1 columns")
        else:
            th = np.asarray(profile.theta)
            if np.any(np.diff(th) <= 0):
                errors.append("profile theta column must be strictly increasing")
            if n and (th[0] > 0.0 or th[-1] < params.T):
                errors.append(f"profile theta column must cover [0, T={params.T}]")
            low = min(profile.sigma1)
            if low <= 0.0:
                errors.append(f"profile sigma1 must be positive, got {low!r}")
    elif profile.kind != "paper-linear":
        errors.append(f"profile.kind must be 'paper-linear' or 'custom-table', got {profile.kind!r}")
    return errors


def validate(params: ModelParams, profile: AfterDefaultProfile | None = None) -> Model:
    """Check every invariant and return a :class:`Model`.

    Raises
    ------
    ModelValidationError
        Lists all violations at once, each naming the field and its value.
    """
    profile = profile or AfterDefaultProfile()
    errors = check_params(params, profile)
    if errors:
        raise ModelValidationError(errors)
    return Model(params, profile)


def tau_of_barrier(level, lam: float):
    """Default time ``level / lam``: first time ``lam * t`` reaches ``level``."""
    if not lam > 0.0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    level = np.asarray(level, dtype=float)
    if np.any(level < 0.0):
        raise ValueError("barrier level must be non-negative")
    out = level / lam
    return float(out) if out.ndim == 0 else out


def after_default_coeffs(theta, model: Model):
    """Post-default ``(mu1, sigma1)`` for a default at time ``theta`` in [0, T]."""
    th = np.asarray(theta, dtype=float)
    T = model.params.T
    if np.any(th < 0.0) or np.any(th > T * (1.0 + 1e-12)):
        raise ValueError(f"default time must lie in [0, T={T}], got {theta!r}")
    return model.profile.coeffs(np.minimum(th, T), model.params)


def sample_barrier(rng: np.random.Generator, size=None):
    """Draw barrier levels from the unit exponential via ``-log(u)``."""
    u = 1.0 - rng.random(size)  # (0, 1]
    return BarrierLaw().from_uniform(u)


def model_from_mapping(
    config: Mapping[str, Any], base: ModelParams | None = None
) -> Model:
    """Build and validate a model from a flat key-value mapping.

    Unknown keys are rejected.  ``profile.kind`` selects the profile;
    a custom table goes under ``profile.table`` as a list of
    ``[theta, mu1, sigma1]`` rows.
    """
    params = base or ModelParams()
    changes: dict[str, float] = {}
    profile = AfterDefaultProfile()
    kind = None
    table = None
    unknown = []
    for key, value in config.items():
        if key in CONFIG_KEYS:
            changes[key] = float(value)
        elif key == "profile.kind":
            kind = str(value)
        elif key == "profile.table":
            table = value
        elif key == "profile" and isinstance(value, Mapping):
            kind = value.get("kind", kind)
            table = value.get("table", table)
        else:
            unknown.append(key)
    if unknown:
        raise ModelValidationError([f"unknown configuration key {k!r}" for k in unknown])
    params = params.with_(**changes)
    if kind == "custom-table":
        if not table:
            raise ModelValidationError(["profile.kind 'custom-table' needs profile.table rows"])
        rows = np.asarray(table, dtype=float)
        profile = AfterDefaultProfile.table(rows[:, 0], rows[:, 1], rows[:, 2])
    elif kind is not None:
        profile = AfterDefaultProfile(kind)
    return validate(params, profile)


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a JSON configuration document."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ModelValidationError([f"configuration {path} must be a JSON object"])
    return data
