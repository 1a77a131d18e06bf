"""
Isolation Forest and Extended Isolation Forest data descriptors.

Every split is stored as a hyperplane test `y . normal < offset`; axis splits use a
standard basis vector as normal. Tree i draws from its own PCG64 stream seeded with
seed XOR i.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import InsufficientDataError, InvalidArgumentError
from ..models import DataDescription, DataDescriptor, FeatureMatrix, State

logger = logging.getLogger(__name__)

RNG_NAME = "PCG64"
EXACT_HARMONIC_LIMIT = 10_000
DEFAULT_TREES = 100
DEFAULT_SUBSAMPLE_CAP = 256
# Extended splits that leave one side empty are redrawn this many times before
# falling back to an axis split.
MAX_HYPERPLANE_DRAWS = 64


class SplitMode(str, Enum):
    AXIS = "axis"
    EXTENDED = "extended"


@lru_cache(maxsize=None)
def harmonic_number(j: int) -> float:
    if j <= EXACT_HARMONIC_LIMIT:
        return math.fsum(1.0 / i for i in range(1, j + 1))
    return math.log(j) + np.euler_gamma + 1.0 / (2 * j) - 1.0 / (12 * j * j)


def expected_path_length(i: int) -> float:
    """
    Expected average path length c(i) of an unsuccessful search among i instances.

    c(1) = 0: a single instance needs no further splits.

    Raises:
        InvalidArgumentError: If i < 1.
    """
    if i < 1:
        raise InvalidArgumentError(f"Path length is defined for i >= 1, got {i}.")
    if i == 1:
        return 0.0
    return 2.0 * harmonic_number(i - 1) - 2.0 * (i - 1) / i


def path_length_table(max_size: int) -> np.ndarray:
    """c(0..max_size) as an array; entry 0 is unused and set to 0."""
    return np.array([0.0] + [expected_path_length(i) for i in range(1, max_size + 1)])


def isolation_score(mean_path_length: np.ndarray, psi: int) -> np.ndarray:
    """Target-membership score 1 - 2^(-mean path / c(psi))."""
    normaliser = expected_path_length(psi)
    if normaliser <= 0:
        raise InvalidArgumentError(f"Subsample size must be at least 2, got {psi}.")
    return 1.0 - np.power(2.0, -np.asarray(mean_path_length, dtype=np.float64) / normaliser)


@dataclass(frozen=True, eq=False)
class IsolationTree:
    """
    A binary incomplete search tree in flat-array form.

    `left`/`right` are -1 at leaves; `size` is the number of subsample instances
    reaching a leaf (0 at internal nodes).
    """

    normal: np.ndarray
    offset: np.ndarray
    left: np.ndarray
    right: np.ndarray
    size: np.ndarray
    depth: np.ndarray

    @property
    def node_count(self) -> int:
        return int(self.offset.shape[0])

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.left < 0)

    def path_lengths(self, Y: np.ndarray, c_table: np.ndarray) -> np.ndarray:
        """h_T(y): edges to the leaf reached by y plus c(leaf size)."""
        node = np.zeros(Y.shape[0], dtype=np.int64)
        active = self.left[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            current = node[idx]
            projection = np.einsum("ij,ij->i", Y[idx], self.normal[current])
            node[idx] = np.where(projection < self.offset[current], self.left[current], self.right[current])
            active = self.left[node] >= 0
        return self.depth[node] + c_table[self.size[node]]


class _TreeBuilder:
    def __init__(self, rng: np.random.Generator, mode: SplitMode, height_limit: int, m: int):
        self.rng = rng
        self.mode = mode
        self.height_limit = height_limit
        self.m = m
        self.normal: List[np.ndarray] = []
        self.offset: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.size: List[int] = []
        self.depth: List[int] = []

    def _new_node(self, depth: int) -> int:
        self.normal.append(np.zeros(self.m))
        self.offset.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.size.append(0)
        self.depth.append(depth)
        return len(self.offset) - 1

    def _axis_split(self, rows: np.ndarray, lows: np.ndarray, highs: np.ndarray) -> Tuple[np.ndarray, float, np.ndarray]:
        attribute = int(self.rng.choice(np.flatnonzero(highs > lows)))
        low, high = lows[attribute], highs[attribute]
        threshold = self.rng.uniform(low, high)
        if threshold <= low:
            threshold = np.nextafter(low, high)
        normal = np.zeros(self.m)
        normal[attribute] = 1.0
        return normal, float(threshold), rows[:, attribute] < threshold

    def _extended_split(self, rows: np.ndarray, lows: np.ndarray, highs: np.ndarray) -> Tuple[np.ndarray, float, np.ndarray]:
        for _ in range(MAX_HYPERPLANE_DRAWS):
            normal = self.rng.standard_normal(self.m)
            point = self.rng.uniform(lows, highs)
            offset = float(point @ normal)
            goes_left = rows @ normal < offset
            if 0 < goes_left.sum() < rows.shape[0]:
                return normal, offset, goes_left
        logger.debug("No separating hyperplane drawn; falling back to an axis split")
        return self._axis_split(rows, lows, highs)

    def grow(self, rows: np.ndarray, depth: int = 0) -> int:
        node = self._new_node(depth)
        lows, highs = rows.min(axis=0), rows.max(axis=0)
        if depth >= self.height_limit or rows.shape[0] <= 1 or not (highs > lows).any():
            self.size[node] = rows.shape[0]
            return node

        if self.mode is SplitMode.AXIS:
            normal, offset, goes_left = self._axis_split(rows, lows, highs)
        else:
            normal, offset, goes_left = self._extended_split(rows, lows, highs)
        self.normal[node] = normal
        self.offset[node] = offset
        self.left[node] = self.grow(rows[goes_left], depth + 1)
        self.right[node] = self.grow(rows[~goes_left], depth + 1)
        return node

    def tree(self) -> IsolationTree:
        return IsolationTree(
            normal=np.array(self.normal).reshape(-1, self.m),
            offset=np.array(self.offset, dtype=np.float64),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            size=np.array(self.size, dtype=np.int64),
            depth=np.array(self.depth, dtype=np.int64),
        )


def tree_rng(seed: int, tree: int) -> np.random.Generator:
    """Independent generator for one tree: PCG64 seeded with seed XOR tree."""
    return np.random.Generator(np.random.PCG64(int(seed) ^ int(tree)))


def grow_tree(X: np.ndarray, psi: int, mode: SplitMode, seed: int, tree: int) -> IsolationTree:
    rng = tree_rng(seed, tree)
    subsample = X[rng.choice(X.shape[0], size=psi, replace=False)]
    height_limit = int(math.ceil(math.log2(psi)))
    builder = _TreeBuilder(rng, mode, height_limit, X.shape[1])
    builder.grow(subsample)
    return builder.tree()


@dataclass(frozen=True, eq=False)
class IsolationForestModel(DataDescription):
    """
    Scores y by 1 - s(y), with s the isolation anomaly score averaged over all trees.
    """

    trees: Tuple[IsolationTree, ...]
    psi: int
    mode: SplitMode
    seed: int
    dimensions: int

    @property
    def kind(self) -> str:  # type: ignore[override]
        return "if" if self.mode is SplitMode.AXIS else "eif"

    @property
    def m(self) -> int:
        return self.dimensions

    @property
    def t(self) -> int:
        return len(self.trees)

    def mean_path_lengths(self, Y: np.ndarray) -> np.ndarray:
        c_table = path_length_table(self.psi)
        total = np.zeros(Y.shape[0])
        for tree in self.trees:
            total += tree.path_lengths(Y, c_table)
        return total / self.t

    def _score_many(self, Y: np.ndarray) -> np.ndarray:
        return isolation_score(self.mean_path_lengths(Y), self.psi)

    def hyperparameters(self) -> Dict[str, Any]:
        return {"t": self.t, "psi": self.psi, "mode": self.mode.value, "seed": self.seed, "rng": RNG_NAME}

    def get_state(self) -> State:
        counts = [tree.node_count for tree in self.trees]
        return {
            "psi": self.psi,
            "mode": self.mode.value,
            "seed": self.seed,
            "dimensions": self.dimensions,
            "node_counts": np.array(counts, dtype=np.int64),
            "normal": np.concatenate([tree.normal for tree in self.trees]),
            "offset": np.concatenate([tree.offset for tree in self.trees]),
            "left": np.concatenate([tree.left for tree in self.trees]),
            "right": np.concatenate([tree.right for tree in self.trees]),
            "size": np.concatenate([tree.size for tree in self.trees]),
            "depth": np.concatenate([tree.depth for tree in self.trees]),
        }

    @classmethod
    def from_state(cls, state: State) -> "IsolationForestModel":
        bounds = np.concatenate([[0], np.cumsum(np.asarray(state["node_counts"], dtype=np.int64))])
        dimensions = int(state["dimensions"])
        normal = np.asarray(state["normal"], dtype=np.float64).reshape(-1, dimensions)
        trees = tuple(
            IsolationTree(
                normal=normal[start:stop],
                offset=np.asarray(state["offset"][start:stop], dtype=np.float64),
                left=np.asarray(state["left"][start:stop], dtype=np.int64),
                right=np.asarray(state["right"][start:stop], dtype=np.int64),
                size=np.asarray(state["size"][start:stop], dtype=np.int64),
                depth=np.asarray(state["depth"][start:stop], dtype=np.int64),
            )
            for start, stop in zip(bounds[:-1], bounds[1:])
        )
        return cls(
            trees=trees,
            psi=int(state["psi"]),
            mode=SplitMode(state["mode"]),
            seed=int(state["seed"]),
            dimensions=dimensions,
        )


@dataclass(frozen=True)
class IsolationForest(DataDescriptor):
    """
    Isolation Forest; `mode=SplitMode.EXTENDED` gives the Extended Isolation Forest.

    Attributes:
        t: Number of trees.
        psi: Subsample size per tree; None means min(256, n).
        mode: Axis-parallel or random-slope hyperplane splits.
        seed: Seed of the per-tree PCG64 streams.
    """

    t: int = DEFAULT_TREES
    psi: Optional[int] = None
    mode: SplitMode = SplitMode.AXIS
    seed: int = 0

    @property
    def kind(self) -> str:  # type: ignore[override]
        return "if" if SplitMode(self.mode) is SplitMode.AXIS else "eif"

    def fit(self, train: FeatureMatrix) -> IsolationForestModel:
        if train.n < 2:
            raise InsufficientDataError(f"Isolation forests need at least 2 training instances, got {train.n}.")
        if self.t < 1:
            raise InvalidArgumentError(f"Tree count must be at least 1, got {self.t}.")
        psi = min(DEFAULT_SUBSAMPLE_CAP, train.n) if self.psi is None else int(self.psi)
        if not 2 <= psi <= train.n:
            raise InvalidArgumentError(f"Subsample size must lie in [2, {train.n}], got {psi}.")
        if self.seed < 0:
            raise InvalidArgumentError(f"Seed must be nonnegative, got {self.seed}.")

        mode = SplitMode(self.mode)
        logger.info(f"Growing {self.t} {mode.value} isolation trees on subsamples of {psi}")
        trees = tuple(grow_tree(train.values, psi, mode, self.seed, i) for i in range(self.t))
        return IsolationForestModel(trees=trees, psi=psi, mode=mode, seed=int(self.seed), dimensions=train.m)
