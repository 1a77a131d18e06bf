"""
Robust rescaling by interquartile range, and the sparsity statistic of a dataset.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from .exceptions import ShapeError, ValidationError
from .models import FeatureMatrix, validate_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class IqrScaler:
    """
    Per-attribute divisors fitted on target-class training data.
    """

    scale: np.ndarray

    def __post_init__(self):
        scale = np.array(self.scale, dtype=np.float64)
        if scale.ndim != 1 or not np.isfinite(scale).all() or (scale <= 0).any():
            raise ValidationError("Scaler divisors must be a vector of finite positive values.")
        scale.setflags(write=False)
        object.__setattr__(self, "scale", scale)

    @property
    def m(self) -> int:
        return int(self.scale.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        """Convert the scaler to a dictionary."""
        return {"scale": [float(s) for s in self.scale]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IqrScaler":
        """Create a scaler from a dictionary."""
        return cls(scale=np.asarray(data["scale"], dtype=np.float64))

    @classmethod
    def identity(cls, m: int) -> "IqrScaler":
        return cls(scale=np.ones(m))


def fit_iqr_scaler(train: FeatureMatrix) -> IqrScaler:
    """
    Fit per-attribute interquartile-range divisors.

    Percentiles use linear interpolation between order statistics. Attributes with
    zero IQR get divisor 1 and pass through unscaled.

    Args:
        train: Target-class training instances.

    Returns:
        The fitted scaler.
    """
    q25, q75 = np.percentile(train.values, [25.0, 75.0], axis=0, method="linear")
    iqr = q75 - q25
    degenerate = iqr <= 0
    if degenerate.any():
        logger.debug(f"{int(degenerate.sum())} attribute(s) with zero IQR left unscaled")
    return IqrScaler(scale=np.where(degenerate, 1.0, iqr))


def apply_scaler(scaler: IqrScaler, X: FeatureMatrix) -> FeatureMatrix:
    """
    Divide every attribute by its divisor.

    Raises:
        ShapeError: If X does not have the scaler's number of attributes.
    """
    if X.m != scaler.m:
        raise ShapeError(f"Scaler expects {scaler.m} attributes, got {X.m}.")
    return validate_matrix(X.values / scaler.scale)


def scale_queries(scaler: IqrScaler, Y: np.ndarray) -> np.ndarray:
    """Apply the scaler to a raw (q, m) query array, which may have zero rows."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[1] != scaler.m:
        raise ShapeError(f"Scaler expects {scaler.m} attributes, got shape {Y.shape}.")
    return Y / scaler.scale


def sparsity(X: FeatureMatrix) -> float:
    """
    Fraction of all n*m cells whose value equals the mode of their column.

    Only the modal count matters, so mode ties need no tie-break here.
    """
    modal = 0
    for column in X.values.T:
        _, counts = np.unique(column, return_counts=True)
        modal += int(counts.max())
    return modal / float(X.n * X.m)
