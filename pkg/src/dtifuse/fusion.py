"""Convex combination of the three agent scores.

The merged score is

    merged = alpha * ml + beta * search + (1 - alpha - beta) * kg

with 0 < alpha < 1, 0 < beta < 1 and alpha + beta < 1, so the weight on the
knowledge-graph score is always positive. The three component scores are
combined on whatever scales they natively use; no rescaling happens here
(the ML score is on a binding-affinity scale near 4-10 while the search and
graph scores live in [0, 1] -- see README for the consequences).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidWeights

__all__ = ["WeightVector", "merge", "merge_with_weights"]

# Components must sum to one within this tolerance.
SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class WeightVector:
    """Point on the probability simplex, ordered (ml, search, kg)."""

    ml: float
    search: float
    kg: float

    def __post_init__(self):
        for name, w in (("ml", self.ml), ("search", self.search), ("kg", self.kg)):
            if not math.isfinite(w):
                raise InvalidWeights(f"{name} weight is not finite: {w!r}")
            if w < 0.0:
                raise InvalidWeights(f"{name} weight is negative: {w!r}")
        total = self.ml + self.search + self.kg
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidWeights(f"weights sum to {total!r}, expected 1")

    @classmethod
    def from_alpha_beta(cls, alpha: float, beta: float) -> "WeightVector":
        """Build (alpha, beta, 1 - alpha - beta), enforcing the open constraints."""
        validate_alpha_beta(alpha, beta)
        return cls(alpha, beta, 1.0 - alpha - beta)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.ml, self.search, self.kg)


def validate_alpha_beta(alpha: float, beta: float) -> None:
    """Reject (alpha, beta) outside the open region 0<a<1, 0<b<1, a+b<1."""
    # NaN fails every comparison, so it is rejected here as well.
    if not (isinstance(alpha, (int, float)) and isinstance(beta, (int, float))):
        raise InvalidWeights(f"alpha/beta must be numbers, got {alpha!r}, {beta!r}")
    if not (0.0 < alpha < 1.0):
        raise InvalidWeights(f"alpha must satisfy 0 < alpha < 1, got {alpha!r}")
    if not (0.0 < beta < 1.0):
        raise InvalidWeights(f"beta must satisfy 0 < beta < 1, got {beta!r}")
    if not (alpha + beta < 1.0):
        raise InvalidWeights(f"alpha + beta must be < 1, got {alpha + beta!r}")


def merge_with_weights(ml: float, search: float, kg: float, weights: WeightVector) -> float:
    """Dot product of the weight vector with the scores, in the fixed (ml, search, kg) order."""
    for name, s in (("ml", ml), ("search", search), ("kg", kg)):
        if not math.isfinite(s):
            raise ValueError(f"{name} score is not finite: {s!r}")
    return weights.ml * ml + weights.search * search + weights.kg * kg


def merge(ml: float, search: float, kg: float, alpha: float, beta: float) -> float:
    """Merge the three scores as alpha*ml + beta*search + (1-alpha-beta)*kg."""
    return merge_with_weights(ml, search, kg, WeightVector.from_alpha_beta(alpha, beta))
