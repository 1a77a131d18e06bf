"""
Distance metrics and exact k-nearest-neighbour search.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import InvalidArgumentError, ShapeError
from .models import FeatureMatrix

# Rows of queries handled per distance block, bounding the (block, n) matrix.
QUERY_BLOCK = 1024


class Metric(str, Enum):
    MANHATTAN = "manhattan"
    EUCLIDEAN = "euclidean"

    @property
    def scipy_name(self) -> str:
        return "cityblock" if self is Metric.MANHATTAN else "euclidean"


def distance(metric: Metric, x: Sequence[float], y: Sequence[float]) -> float:
    """
    Distance between two vectors.

    Raises:
        ShapeError: If the vectors differ in length.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError(f"Vectors must have equal length, got {x.shape} and {y.shape}.")
    diff = np.abs(x - y)
    if Metric(metric) is Metric.MANHATTAN:
        return float(diff.sum())
    return float(np.sqrt(np.dot(diff, diff)))


@dataclass(frozen=True, eq=False)
class NeighborIndex:
    """
    Brute-force nearest-neighbour index over a training matrix.

    Results are sorted by distance, ties broken by ascending training-row id.
    """

    X: FeatureMatrix
    metric: Metric

    @property
    def n(self) -> int:
        return self.X.n

    def _check_k(self, k: int, excluding: bool) -> None:
        upper = self.n - 1 if excluding else self.n
        if not 1 <= k <= upper:
            raise InvalidArgumentError(f"k must lie in [1, {upper}], got {k}.")

    def query_many(
        self, Y: np.ndarray, k: int, exclude: Optional[np.ndarray] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        k nearest training rows of each query.

        Args:
            Y: A (q, m) query array.
            k: Number of neighbours.
            exclude: Optional length-q vector of training-row ids to skip, one per query
                (-1 for none).

        Returns:
            A tuple (ids, dists) of (q, k) arrays.
        """
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[1] != self.X.m:
            raise ShapeError(f"Queries must have {self.X.m} attributes, got shape {Y.shape}.")
        self._check_k(k, excluding=exclude is not None and bool((np.asarray(exclude) >= 0).any()))

        ids = np.empty((Y.shape[0], k), dtype=np.int64)
        dists = np.empty((Y.shape[0], k), dtype=np.float64)
        for start in range(0, Y.shape[0], QUERY_BLOCK):
            stop = min(start + QUERY_BLOCK, Y.shape[0])
            block = cdist(Y[start:stop], self.X.values, metric=self.metric.scipy_name)
            if exclude is not None:
                rows = np.arange(stop - start)
                skip = np.asarray(exclude[start:stop], dtype=np.int64)
                mask = skip >= 0
                block[rows[mask], skip[mask]] = np.inf
            order = np.argsort(block, axis=1, kind="stable")[:, :k]
            ids[start:stop] = order
            dists[start:stop] = np.take_along_axis(block, order, axis=1)
        return ids, dists

    def self_neighbours(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """k nearest neighbours of every training row, excluding the row itself."""
        return self.query_many(self.X.values, k, exclude=np.arange(self.n))

    def query_knn(
        self, y: Sequence[float], k: int, exclude: Optional[int] = None
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        k nearest training rows of a single query.

        Args:
            y: Query vector.
            k: Number of neighbours, in [1, n] (or [1, n - 1] when excluding).
            exclude: Training-row id to skip, for queries drawn from the training set.

        Returns:
            A tuple (ids, dists) of length-k vectors.
        """
        if exclude is not None and not 0 <= exclude < self.n:
            raise InvalidArgumentError(f"exclude must be a training-row id in [0, {self.n - 1}], got {exclude}.")
        y = np.asarray(y, dtype=np.float64)
        if y.ndim != 1:
            raise ShapeError(f"A single query must be a vector, got shape {y.shape}.")
        skip = None if exclude is None else np.array([exclude])
        ids, dists = self.query_many(y[np.newaxis, :], k, exclude=skip)
        return ids[0], dists[0]

    def kth_distance_profile(
        self, y: Sequence[float], k: int, exclude: Optional[int] = None
    ) -> np.ndarray:
        """Distances d_1(y), ..., d_k(y) to the k nearest training rows."""
        return self.query_knn(y, k, exclude)[1]


def build_index(X: FeatureMatrix, metric: Metric = Metric.MANHATTAN) -> NeighborIndex:
    """Build an exact k-NN index over X."""
    return NeighborIndex(X=X, metric=Metric(metric))
