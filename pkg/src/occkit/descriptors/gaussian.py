"""
Mahalanobis Distance data descriptor.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from ..exceptions import InsufficientDataError
from ..models import DataDescription, DataDescriptor, FeatureMatrix, State, distances_to_scores

logger = logging.getLogger(__name__)

# Eigenvalues below this fraction of the largest one are treated as zero.
RELATIVE_EIGENVALUE_CUTOFF = 1e-10


def pseudo_inverse(S: np.ndarray) -> np.ndarray:
    """
    Moore-Penrose pseudo-inverse of a symmetric positive-semidefinite matrix,
    through its eigendecomposition.
    """
    eigenvalues, eigenvectors = np.linalg.eigh(S)
    largest = float(eigenvalues.max()) if eigenvalues.size else 0.0
    if largest <= 0:
        return np.zeros_like(S)
    keep = eigenvalues > RELATIVE_EIGENVALUE_CUTOFF * largest
    if not keep.all():
        logger.info(f"Covariance has rank {int(keep.sum())} of {S.shape[0]}; using its pseudo-inverse")
    inverse = np.where(keep, 1.0 / np.where(keep, eigenvalues, 1.0), 0.0)
    precision = (eigenvectors * inverse) @ eigenvectors.T
    return (precision + precision.T) / 2.0


@dataclass(frozen=True, eq=False)
class MdModel(DataDescription):
    """Scores y by 1 / (1 + D(y)) with D the Mahalanobis distance to the training mean."""

    mean: np.ndarray
    precision: np.ndarray
    kind = "md"

    @property
    def m(self) -> int:
        return int(self.mean.shape[0])

    def mahalanobis(self, Y: np.ndarray) -> np.ndarray:
        diff = np.atleast_2d(Y) - self.mean
        squared = np.einsum("qi,ij,qj->q", diff, self.precision, diff)
        return np.sqrt(np.maximum(squared, 0.0))

    def _score_many(self, Y: np.ndarray) -> np.ndarray:
        return distances_to_scores(self.mahalanobis(Y))

    def hyperparameters(self) -> Dict[str, Any]:
        return {}

    def get_state(self) -> State:
        return {"mean": self.mean, "precision": self.precision}

    @classmethod
    def from_state(cls, state: State) -> "MdModel":
        return cls(
            mean=np.asarray(state["mean"], dtype=np.float64),
            precision=np.asarray(state["precision"], dtype=np.float64),
        )


@dataclass(frozen=True)
class MahalanobisDistance(DataDescriptor):
    kind = "md"

    def fit(self, train: FeatureMatrix) -> MdModel:
        """
        Fit the column means and the pseudo-inverse of the sample covariance (divisor n - 1).
        """
        if train.n < 2:
            raise InsufficientDataError(f"MD needs at least 2 training instances, got {train.n}.")
        mean = train.values.mean(axis=0)
        covariance = np.atleast_2d(np.cov(train.values, rowvar=False, ddof=1))
        return MdModel(mean=mean, precision=pseudo_inverse(covariance))
