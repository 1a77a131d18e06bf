"""
Weight vectors and the Ordered Weighted Averaging (OWA) operator.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import InvalidArgumentError, ShapeError

WEIGHT_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class WeightVector:
    """
    Nonnegative, nonincreasing weights in [0, 1] that sum to 1.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise InvalidArgumentError("A weight vector needs at least one weight.")
        if (w < 0).any() or (w > 1).any():
            raise InvalidArgumentError("Weights must lie in [0, 1].")
        if (np.diff(w) > 0).any():
            raise InvalidArgumentError("Weights must be nonincreasing.")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise InvalidArgumentError(f"Weights must sum to 1, got {w.sum()!r}.")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return int(self.weights.size)


def linear_weights(p: int) -> WeightVector:
    """
    Linearly decreasing weights p/T, (p-1)/T, ..., 1/T with T the p-th triangular number.

    Raises:
        InvalidArgumentError: If p < 1.
    """
    if p < 1:
        raise InvalidArgumentError(f"p must be at least 1, got {p}.")
    triangular = p * (p + 1) / 2.0
    return WeightVector(np.arange(p, 0, -1, dtype=np.float64) / triangular)


def uniform_weights(p: int) -> WeightVector:
    if p < 1:
        raise InvalidArgumentError(f"p must be at least 1, got {p}.")
    return WeightVector(np.full(p, 1.0 / p))


def owa_apply(w: WeightVector, values: Sequence[float]) -> float:
    """
    Weighted sum of the values sorted from large to small.

    Raises:
        ShapeError: If the number of values differs from the number of weights.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ShapeError(f"Expected a vector of values, got shape {values.shape}.")
    return float(owa_apply_many(w, values[np.newaxis, :])[0])


def owa_apply_many(w: WeightVector, values: np.ndarray) -> np.ndarray:
    """Row-wise OWA over a (q, p) array."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != len(w):
        raise ShapeError(f"Expected {len(w)} values per row, got shape {values.shape}.")
    descending = -np.sort(-values, axis=1, kind="stable")
    return descending @ w.weights
