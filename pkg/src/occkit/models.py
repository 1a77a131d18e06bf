"""
Core data models: datasets, data descriptors and the data descriptions they produce.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, Sequence, Union

import numpy as np

from .exceptions import InvalidArgumentError, ShapeError, ValidationError

ArrayLike = Union[np.ndarray, Sequence[Sequence[float]]]

# Fitted state as stored in model files: numpy arrays plus JSON-able scalars.
State = Dict[str, Any]


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """
    An n x m table of finite attribute values.

    Instances are built through `validate_matrix`; the wrapped array is read-only.
    """

    values: np.ndarray

    @property
    def n(self) -> int:
        """Number of instances."""
        return int(self.values.shape[0])

    @property
    def m(self) -> int:
        """Number of attributes."""
        return int(self.values.shape[1])

    def __len__(self) -> int:
        return self.n

    def take(self, rows: Sequence[int]) -> "FeatureMatrix":
        """Return the matrix restricted to the given row ids, in that order."""
        return validate_matrix(self.values[np.asarray(rows, dtype=np.int64)])


def validate_matrix(raw: ArrayLike) -> FeatureMatrix:
    """
    Validate a rectangular table of reals and wrap it as a FeatureMatrix.

    Args:
        raw: A 2-D numpy array or a sequence of equally long rows.

    Returns:
        The validated matrix (an independent read-only float64 copy).

    Raises:
        ShapeError: If the table is empty, ragged or not two-dimensional.
        ValidationError: If a cell is non-numeric, NaN or infinite.
    """
    if not isinstance(raw, np.ndarray):
        rows = [list(row) for row in raw]
        if not rows:
            raise ShapeError("Empty table: at least one row is required.")
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise ShapeError(f"Ragged table: row {i} has {len(row)} values, expected {width}.")
        raw = rows

    try:
        values = np.array(raw, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Table contains non-numeric values: {e}") from e

    if values.ndim != 2:
        raise ShapeError(f"Expected a two-dimensional table, got {values.ndim} dimension(s).")
    if values.shape[0] == 0 or values.shape[1] == 0:
        raise ShapeError(f"Empty table: shape {values.shape}.")

    bad = ~np.isfinite(values)
    if bad.any():
        row, column = (int(i) for i in np.argwhere(bad)[0])
        raise ValidationError(
            f"Non-finite value {values[row, column]} at row {row}, column {column}.",
            row=row,
            column=column,
        )

    values.setflags(write=False)
    return FeatureMatrix(values)


def distance_to_score(z: float) -> float:
    """
    Map a nonnegative distance to a score in [0, 1] with z -> 1 / (1 + z).

    +inf is admitted and maps to 0.

    Raises:
        InvalidArgumentError: If z is negative or NaN.
    """
    z = float(z)
    if math.isnan(z) or z < 0:
        raise InvalidArgumentError(f"Distance must be nonnegative, got {z}.")
    if math.isinf(z):
        return 0.0
    return 1.0 / (1.0 + z)


def distances_to_scores(z: np.ndarray) -> np.ndarray:
    """Vectorised `distance_to_score`."""
    z = np.asarray(z, dtype=np.float64)
    if np.isnan(z).any() or (z < 0).any():
        raise InvalidArgumentError("Distances must be nonnegative and not NaN.")
    with np.errstate(over="ignore"):
        return np.where(np.isinf(z), 0.0, 1.0 / (1.0 + z))


class DataDescription(ABC):
    """
    A fitted scorer from attribute space to [0, 1]; higher means more target-like.

    Implementations are immutable once constructed and may be queried from several
    threads at once.
    """

    kind: ClassVar[str]

    @property
    @abstractmethod
    def m(self) -> int:
        """Expected query dimensionality."""

    @abstractmethod
    def _score_many(self, Y: np.ndarray) -> np.ndarray:
        """Score a validated (q, m) array of queries."""

    @abstractmethod
    def hyperparameters(self) -> Dict[str, Any]:
        """Concrete hyperparameter values this description was fitted with."""

    @abstractmethod
    def get_state(self) -> State:
        """Fitted state for serialisation."""

    @classmethod
    @abstractmethod
    def from_state(cls, state: State) -> "DataDescription":
        """Rebuild a description from `get_state` output."""

    def score_many(self, Y: ArrayLike) -> np.ndarray:
        """
        Score a batch of queries.

        Args:
            Y: A (q, m) array of queries; a single vector is treated as q = 1.

        Returns:
            A length-q vector of scores in [0, 1].
        """
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[np.newaxis, :]
        if Y.ndim != 2 or Y.shape[1] != self.m:
            raise ShapeError(f"Queries must have {self.m} attributes, got shape {Y.shape}.")
        if Y.shape[0] == 0:
            return np.empty(0, dtype=np.float64)
        if not np.isfinite(Y).all():
            row, column = (int(i) for i in np.argwhere(~np.isfinite(Y))[0])
            raise ValidationError(f"Non-finite query value at row {row}, column {column}.", row, column)
        return self._score_many(Y)

    def score(self, y: Sequence[float]) -> float:
        """Score a single query vector of length m."""
        y = np.asarray(y, dtype=np.float64)
        if y.ndim != 1:
            raise ShapeError(f"A single query must be a vector, got shape {y.shape}.")
        return float(self.score_many(y[np.newaxis, :])[0])


class DataDescriptor(ABC):
    """
    A data descriptor: hyperparameters plus a fit procedure that yields a DataDescription.

    Fitting never modifies the training matrix.
    """

    kind: ClassVar[str]

    @abstractmethod
    def fit(self, train: FeatureMatrix) -> DataDescription:
        """Fit on target-class training data."""
