"""Fixed-step backward RK4 with a Richardson error estimate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class IntegrationError(RuntimeError):
    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (estimated error {error_estimate:.3e})")
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class BackwardSolution:
    t: np.ndarray          # (n+1,) or (n+1, batch)
    y: np.ndarray
    error_estimate: float


def rk4_backward(f: Callable, y_end, t_start, t_end, n_steps: int):
    """Integrate ``dy/dt = -f(t, y)`` from ``t_end`` down to ``t_start``.

    ``t_start``, ``t_end`` and ``y_end`` may be arrays of equal shape, in which
    case each component gets its own uniform grid of ``n_steps`` steps and
    ``f`` must be vectorised.  Returns ``(t, y)`` with rows ordered by
    increasing time.
    """
    y = np.array(y_end, dtype=float)
    t0 = np.broadcast_to(np.asarray(t_start, dtype=float), y.shape)
    t1 = np.broadcast_to(np.asarray(t_end, dtype=float), y.shape)
    h = (t1 - t0) / n_steps
    ts = np.empty((n_steps + 1,) + y.shape)
    ys = np.empty_like(ts)
    t = t1.copy()
    ts[n_steps], ys[n_steps] = t, y
    for i in range(n_steps - 1, -1, -1):
        # reversed time s = t_end - t turns this into a forward problem dy/ds = f
        k1 = f(t, y)
        k2 = f(t - 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t - 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t - h, y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t1 - (n_steps - i) * h
        ts[i], ys[i] = t, y
    return ts, ys


def solve_backward(
    f: Callable,
    y_end,
    t_start,
    t_end,
    n_steps: int = 2000,
    rtol: float | None = 1e-6,
) -> BackwardSolution:
    """RK4 solve plus a half-resolution rerun for the error estimate.

    The estimate is ``max |y_n(t_start) - y_{n/2}(t_start)| / 15`` relative to
    ``|y_n(t_start)|``.  Raises :class:`IntegrationError` when it exceeds
    ``rtol`` (pass ``None`` to skip the check).
    """
    if n_steps < 2 or n_steps % 2:
        raise ValueError("n_steps must be an even integer >= 2")
    ts, ys = rk4_backward(f, y_end, t_start, t_end, n_steps)
    _, coarse = rk4_backward(f, y_end, t_start, t_end, n_steps // 2)
    scale = np.maximum(np.abs(ys[0]), 1e-300)
    err = float(np.max(np.abs(ys[0] - coarse[0]) / scale) / 15.0)
    if rtol is not None and err > rtol:
        raise IntegrationError("backward integration did not reach tolerance", err)
    return BackwardSolution(ts, ys, err)
