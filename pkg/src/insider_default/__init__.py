"""Optimal investment for an insider who knows the default barrier."""

__version__ = "0.1.0"

from .after_default import after_default_value, capital_K, kbar_investor, remaining_K
from .before_default import (
    insider_ex_ante_value,
    insider_value,
    investor_value,
    merton_value,
    solve_insider_Y,
    solve_investor_Y,
)
from .curves import ValueCurve, value_curve
from .market import Model, ModelParams, ModelValidationError, model_from_mapping, validate
from .mc import estimate_capital_K, estimate_value, unbounded_wealth_experiment
from .policy import INVESTOR, Policy, Weighting, evaluate_policy

__all__ = [
    "INVESTOR",
    "Model",
    "ModelParams",
    "ModelValidationError",
    "Policy",
    "ValueCurve",
    "Weighting",
    "after_default_value",
    "capital_K",
    "estimate_capital_K",
    "estimate_value",
    "evaluate_policy",
    "insider_ex_ante_value",
    "insider_value",
    "investor_value",
    "kbar_investor",
    "merton_value",
    "model_from_mapping",
    "remaining_K",
    "solve_insider_Y",
    "solve_investor_Y",
    "unbounded_wealth_experiment",
    "validate",
    "value_curve",
]
