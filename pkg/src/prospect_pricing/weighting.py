"""Prelec probability weighting, lottery valuation, and alpha fitting.

The weighting map w(p) = exp(-(-ln p)^alpha) distorts probabilities the way
behavioral subjects do: small p overweighted, moderate-to-high p underweighted,
with fixed points at 0, e^-1 and 1. alpha = 1 is the undistorted special case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _search


class InsufficientDataError(ValueError):
    """Raised when a fit is requested on fewer than two samples."""


@dataclass(frozen=True)
class WeightingModel:
    """Single-parameter weighting curve, alpha in (0, 1]."""

    alpha: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")


IDENTITY = WeightingModel(alpha=1.0)


@dataclass(frozen=True)
class Lottery:
    """Discrete lottery: (payoff, probability) pairs with probabilities summing to 1."""

    outcomes: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if len(self.outcomes) == 0:
            raise ValueError("lottery must have at least one outcome")
        total = 0.0
        for payoff, prob in self.outcomes:
            if not (0.0 <= prob <= 1.0):
                raise ValueError(f"outcome probability {prob} outside [0, 1]")
            total += prob
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"outcome probabilities sum to {total}, expected 1")


def weight(p: float, model: WeightingModel) -> float:
    """w(p) = exp(-(-ln p)^alpha), extended continuously with w(0)=0, w(1)=1."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability {p} outside [0, 1]")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    if model.alpha == 1.0:
        return p
    return math.exp(-((-math.log(p)) ** model.alpha))


def inverse_weight(q: float, model: WeightingModel) -> float:
    """Inverse of weight: p = exp(-(-ln q)^(1/alpha))."""
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"probability {q} outside [0, 1]")
    if q == 0.0:
        return 0.0
    if q == 1.0:
        return 1.0
    if model.alpha == 1.0:
        return q
    return math.exp(-((-math.log(q)) ** (1.0 / model.alpha)))


def lottery_value(lottery: Lottery, model: WeightingModel) -> float:
    """Sum of payoff * w(probability); the plain expectation when alpha = 1."""
    return sum(payoff * weight(prob, model) for payoff, prob in lottery.outcomes)


def _mse(samples: list[tuple[float, float]], alpha: float) -> float:
    m = WeightingModel(alpha=alpha)
    n = len(samples)
    return sum((weight(p, m) - wp) ** 2 for p, wp in samples) / n


def fit_alpha(samples: list[tuple[float, float]]) -> tuple[WeightingModel, float]:
    """Least-squares fit of alpha to (p, w(p)) samples.

    Coarse grid (step 0.001 over (0, 1]) then golden-section refinement to 1e-6.
    Returns (model, mse).
    """
    if len(samples) < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {len(samples)}")
    for p, wp in samples:
        if not (0.0 <= p <= 1.0 and 0.0 <= wp <= 1.0):
            raise ValueError(f"sample ({p}, {wp}) outside the unit square")

    best_alpha, best_err = 1.0, _mse(samples, 1.0)
    for k in range(1, 1000):
        a = k / 1000.0
        err = _mse(samples, a)
        if err < best_err:
            best_alpha, best_err = a, err

    lo = max(1e-6, best_alpha - 0.001)
    hi = min(1.0, best_alpha + 0.001)
    a_star, neg = _search.golden_max(lambda a: -_mse(samples, a), lo, hi,
                                     rel_tol=1e-6)
    if -neg < best_err:
        best_alpha, best_err = a_star, -neg
    return WeightingModel(alpha=best_alpha), best_err
