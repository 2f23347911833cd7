"""Projected gradient ascent with Armijo backtracking over [-1,1]^n.

This is the single fully specified local optimizer behind the search
loop.  ``ascend`` only sees black-box callables, so alternative
strategies can be swapped in without touching the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

MAX_ITERS_CAP = 5000
_MIN_STEP = 1e-20

REASON_GRADIENT = "gradient"
REASON_VALUE = "value"
REASON_ITERATIONS = "iterations"
REASON_TARGET = "target_reached"


@dataclass(frozen=True)
class OptimizerConfig:
    """Tolerances and budgets for one ascent trial.

    ``max_iters`` of None resolves to 10*n capped at 5000.  ``grad_tol``
    bounds the infinity norm of the projected ascent direction;
    ``value_tol`` bounds the objective change of an accepted step.
    """

    max_iters: int | None = None
    step_init: float = 1.0
    armijo_c: float = 1e-4
    shrink: float = 0.5
    grad_tol: float = 1e-8
    value_tol: float = 1e-9

    def __post_init__(self):
        if not (0.0 < self.shrink < 1.0):
            raise ValueError("shrink must be in (0, 1)")
        if not (0.0 < self.armijo_c < 1.0):
            raise ValueError("armijo_c must be in (0, 1)")
        if self.grad_tol <= 0 or self.value_tol <= 0 or self.step_init <= 0:
            raise ValueError("tolerances and step_init must be positive")

    def resolve_max_iters(self, n: int) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return min(10 * n, MAX_ITERS_CAP)


@dataclass(frozen=True)
class TrialResult:
    x_star: np.ndarray
    value: float
    iters: int
    converged_reason: str


def project_box(x: Sequence[float]) -> np.ndarray:
    """Clamp every entry to [-1, 1]; NaN signals a diverged objective."""
    arr = np.asarray(x, dtype=np.float64)
    if np.isnan(arr).any():
        raise ValueError("NaN entries cannot be projected")
    return np.clip(arr, -1.0, 1.0)


def ascend(
    evaluate: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: Sequence[float],
    target: float,
    cfg: OptimizerConfig,
    evaluate_value: Callable[[np.ndarray], float] | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> TrialResult:
    """Maximize F from x0 until a convergence reason fires.

    ``evaluate`` returns (value, gradient); ``evaluate_value``, when given,
    is a cheaper value-only path used inside the line search.  Reaching
    ``target`` within value_tol stops immediately with reason
    target_reached.  ``should_stop`` is polled every 32 iterations so the
    caller can enforce a deadline.
    """
    if evaluate_value is None:
        evaluate_value = lambda x: evaluate(x)[0]
    x = project_box(x0)
    value, g = evaluate(x)
    g = np.array(g)
    if not np.isfinite(value):
        raise ValueError("non-finite objective at the start point")
    max_iters = cfg.resolve_max_iters(x.size)
    reason = REASON_ITERATIONS
    iters = 0
    while iters < max_iters:
        if value >= target - cfg.value_tol:
            reason = REASON_TARGET
            break
        if should_stop is not None and iters % 32 == 0 and should_stop():
            reason = REASON_ITERATIONS
            break
        direction = project_box(x + cfg.step_init * g) - x
        if np.abs(direction).max() <= cfg.grad_tol:
            reason = REASON_GRADIENT
            break
        step = cfg.step_init
        accepted = False
        while step >= _MIN_STEP:
            d = project_box(x + step * g) - x
            candidate = x + d
            cand_value = evaluate_value(candidate)
            if not np.isfinite(cand_value):
                raise ValueError("non-finite objective during line search")
            if cand_value >= value + cfg.armijo_c * float(np.dot(g, d)):
                accepted = True
                break
            step *= cfg.shrink
        iters += 1
        if not accepted:
            reason = REASON_VALUE
            break
        gain = cand_value - value
        x = candidate
        value, g = evaluate(x)
        g = np.array(g)
        if gain < cfg.value_tol:
            reason = REASON_VALUE
            break
    else:
        reason = REASON_ITERATIONS
    if value >= target - cfg.value_tol:
        reason = REASON_TARGET
    return TrialResult(x_star=x, value=value, iters=iters, converged_reason=reason)
