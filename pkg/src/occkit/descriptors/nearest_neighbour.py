"""
Nearest-neighbour data descriptors: NND, LNND, LOF and Average Localised Proximity (ALP).

Training-side neighbour tables always exclude the training row itself; external
queries never exclude anything.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Tuple

import numpy as np

from ..exceptions import InsufficientDataError, InvalidArgumentError
from ..models import DataDescription, DataDescriptor, FeatureMatrix, State, distances_to_scores, validate_matrix
from ..neighbors import Metric, NeighborIndex, build_index
from ..owa import WeightVector, linear_weights, owa_apply_many, uniform_weights

logger = logging.getLogger(__name__)


@lru_cache(maxsize=1024)
def _warn_clamped(k: int, clamped: int, n: int) -> None:
    # Logged once per (k, n).
    logger.warning(f"Neighbour count {k} clamped to {clamped} for n={n}")


def clamp_neighbours(k: int, n: int) -> int:
    """Clamp a neighbour count to [1, n - 1], logging a warning when it changes."""
    clamped = int(min(max(int(k), 1), max(n - 1, 1)))
    if clamped != k:
        _warn_clamped(int(k), clamped, int(n))
    return clamped


def _require_rows(train: FeatureMatrix, name: str) -> None:
    if train.n < 2:
        raise InsufficientDataError(f"{name} needs at least 2 training instances, got {train.n}.")


def _index_state(index: NeighborIndex) -> State:
    return {"train": index.X.values, "metric": index.metric.value}


def _index_from_state(state: State) -> NeighborIndex:
    return build_index(validate_matrix(state["train"]), Metric(state["metric"]))


class _NeighbourModel(DataDescription):
    index: NeighborIndex
    k: int

    @property
    def m(self) -> int:
        return self.index.X.m


# -------------------------------------------------------------------------------------
# Nearest Neighbour Distance
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NndModel(_NeighbourModel):
    """Scores y by 1 / (1 + d_k(y))."""

    index: NeighborIndex
    k: int
    kind = "nnd"

    def _score_many(self, Y: np.ndarray) -> np.ndarray:
        _, dists = self.index.query_many(Y, self.k)
        return distances_to_scores(dists[:, self.k - 1])

    def hyperparameters(self) -> Dict[str, Any]:
        return {"k": self.k, "metric": self.index.metric.value}

    def get_state(self) -> State:
        return {**_index_state(self.index), "k": self.k}

    @classmethod
    def from_state(cls, state: State) -> "NndModel":
        return cls(index=_index_from_state(state), k=int(state["k"]))


@dataclass(frozen=True)
class NearestNeighbourDistance(DataDescriptor):
    k: int = 1
    metric: Metric = Metric.MANHATTAN
    kind = "nnd"

    def fit(self, train: FeatureMatrix) -> NndModel:
        _require_rows(train, "NND")
        return NndModel(index=build_index(train, self.metric), k=clamp_neighbours(self.k, train.n))


# -------------------------------------------------------------------------------------
# Localised Nearest Neighbour Distance
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LnndModel(_NeighbourModel):
    """
    Scores y by 1 / (1 + d_k(y) / d_k(NN_k(y))).

    d_k(y) = 0 scores 1; d_k(y) > 0 with a zero local distance scores 0.
    """

    index: NeighborIndex
    k: int
    local_kth: np.ndarray
    kind = "lnnd"

    def _score_many(self, Y: np.ndarray) -> np.ndarray:
        ids, dists = self.index.query_many(Y, self.k)
        d = dists[:, self.k - 1]
        local = self.local_kth[ids[:, self.k - 1]]
        with np.errstate(divide="ignore", invalid="ignore"):
            localised = np.where(d == 0, 0.0, np.where(local == 0, np.inf, d / local))
        return distances_to_scores(localised)

    def hyperparameters(self) -> Dict[str, Any]:
        return {"k": self.k, "metric": self.index.metric.value}

    def get_state(self) -> State:
        return {**_index_state(self.index), "k": self.k, "local_kth": self.local_kth}

    @classmethod
    def from_state(cls, state: State) -> "LnndModel":
        return cls(
            index=_index_from_state(state),
            k=int(state["k"]),
            local_kth=np.asarray(state["local_kth"], dtype=np.float64),
        )


@dataclass(frozen=True)
class LocalisedNearestNeighbourDistance(DataDescriptor):
    k: int = 1
    metric: Metric = Metric.MANHATTAN
    kind = "lnnd"

    def fit(self, train: FeatureMatrix) -> LnndModel:
        _require_rows(train, "LNND")
        k = clamp_neighbours(self.k, train.n)
        index = build_index(train, self.metric)
        _, dists = index.self_neighbours(k)
        return LnndModel(index=index, k=k, local_kth=dists[:, k - 1].copy())


# -------------------------------------------------------------------------------------
# Local Outlier Factor
# -------------------------------------------------------------------------------------


def _ratio_of_densities(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    # inf / inf is taken as 1 (duplicate collapse on both sides)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = numerator / denominator
    both_infinite = np.isinf(numerator) & np.isinf(denominator)
    return np.where(both_infinite, 1.0, ratio)


def _reachability_density(mean_reach: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(mean_reach == 0, np.inf, 1.0 / mean_reach)


@dataclass(frozen=True, eq=False)
class LofModel(_NeighbourModel):
    """
    Scores y by 1 / (1 + lof_k(y)), with training-side k-distances and local
    reachability densities cached at fit time.
    """

    index: NeighborIndex
    k: int
    neighbour_ids: np.ndarray
    kth_dist: np.ndarray
    lrd: np.ndarray
    kind = "lof"

    def _score_many(self, Y: np.ndarray) -> np.ndarray:
        ids, dists = self.index.query_many(Y, self.k)
        reach = np.maximum(dists, self.kth_dist[ids])
        lrd_query = _reachability_density(reach.mean(axis=1))
        ratios = _ratio_of_densities(self.lrd[ids], lrd_query[:, np.newaxis])
        return distances_to_scores(ratios.mean(axis=1))

    def hyperparameters(self) -> Dict[str, Any]:
        return {"k": self.k, "metric": self.index.metric.value}

    def get_state(self) -> State:
        return {
            **_index_state(self.index),
            "k": self.k,
            "neighbour_ids": self.neighbour_ids,
            "kth_dist": self.kth_dist,
            "lrd": self.lrd,
        }

    @classmethod
    def from_state(cls, state: State) -> "LofModel":
        return cls(
            index=_index_from_state(state),
            k=int(state["k"]),
            neighbour_ids=np.asarray(state["neighbour_ids"], dtype=np.int64),
            kth_dist=np.asarray(state["kth_dist"], dtype=np.float64),
            lrd=np.asarray(state["lrd"], dtype=np.float64),
        )


@dataclass(frozen=True)
class LocalOutlierFactor(DataDescriptor):
    k: int = 1
    metric: Metric = Metric.MANHATTAN
    kind = "lof"

    def fit(self, train: FeatureMatrix) -> LofModel:
        _require_rows(train, "LOF")
        k = clamp_neighbours(self.k, train.n)
        index = build_index(train, self.metric)
        ids, dists = index.self_neighbours(k)
        kth_dist = dists[:, k - 1].copy()
        reach = np.maximum(dists, kth_dist[ids])
        return LofModel(
            index=index,
            k=k,
            neighbour_ids=ids,
            kth_dist=kth_dist,
            lrd=_reachability_density(reach.mean(axis=1)),
        )


# -------------------------------------------------------------------------------------
# Average Localised Proximity
# -------------------------------------------------------------------------------------

LOCALISATION_WEIGHTS = {"linear": linear_weights, "uniform": uniform_weights}


def average_localised_proximity(
    query_dists: np.ndarray,
    neighbour_dists: np.ndarray,
    w_k: WeightVector,
    w_l: WeightVector,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Average localised proximity from precomputed neighbour distance profiles.

    Args:
        query_dists: d_1(y), ..., d_k(y); shape (k,) or (q, k).
        neighbour_dists: d_i(NN_j(y)) for j <= l, i <= k; shape (l, k) or (q, l, k).
        w_k: OWA weights over the k scales.
        w_l: Localisation weights over the l nearest neighbours.

    Returns:
        A tuple (D, lp, alp) of the local distances, the localised proximities and the
        final scores. lp_i is 1 where D_i + d_i = 0.
    """
    single = np.ndim(query_dists) == 1
    d = np.atleast_2d(np.asarray(query_dists, dtype=np.float64))
    neighbours = np.asarray(neighbour_dists, dtype=np.float64)
    if single:
        neighbours = neighbours[np.newaxis]
    if neighbours.shape[1:] != (len(w_l), len(w_k)) or d.shape[1] != len(w_k):
        raise InvalidArgumentError(
            f"Profiles of shape {d.shape} and {neighbours.shape} do not match k={len(w_k)}, l={len(w_l)}."
        )

    local = np.einsum("j,qji->qi", w_l.weights, neighbours)
    total = local + d
    proximity = np.divide(local, total, out=np.ones_like(local), where=total > 0)
    alp = owa_apply_many(w_k, proximity)
    if single:
        return local[0], proximity[0], alp[0]
    return local, proximity, alp


@dataclass(frozen=True, eq=False)
class AlpModel(_NeighbourModel):
    """
    Average localised proximity over k neighbour scales, localised against the
    neighbour distances of the l nearest training instances.
    """

    index: NeighborIndex
    k: int
    l: int
    w_k: WeightVector
    w_l: WeightVector
    nn_dists: np.ndarray
    localisation: str = "linear"
    kind = "alp"

    def _score_many(self, Y: np.ndarray) -> np.ndarray:
        ids, dists = self.index.query_many(Y, max(self.k, self.l))
        neighbours = self.nn_dists[ids[:, : self.l]]
        _, _, alp = average_localised_proximity(dists[:, : self.k], neighbours, self.w_k, self.w_l)
        return alp

    def hyperparameters(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "l": self.l,
            "localisation": self.localisation,
            "metric": self.index.metric.value,
        }

    def get_state(self) -> State:
        return {
            **_index_state(self.index),
            "k": self.k,
            "l": self.l,
            "localisation": self.localisation,
            "nn_dists": self.nn_dists,
        }

    @classmethod
    def from_state(cls, state: State) -> "AlpModel":
        k, l = int(state["k"]), int(state["l"])
        localisation = str(state.get("localisation", "linear"))
        return cls(
            index=_index_from_state(state),
            k=k,
            l=l,
            w_k=linear_weights(k),
            w_l=LOCALISATION_WEIGHTS[localisation](l),
            nn_dists=np.asarray(state["nn_dists"], dtype=np.float64),
            localisation=localisation,
        )


@dataclass(frozen=True)
class AverageLocalisedProximity(DataDescriptor):
    """
    ALP descriptor.

    Attributes:
        k: Number of neighbour scales aggregated by the OWA operator.
        l: Number of nearest training instances used for localisation.
        metric: Dissimilarity measure; Manhattan by default.
        localisation: Weight family for localisation, "linear" or "uniform".
    """

    k: int = 1
    l: int = 1
    metric: Metric = Metric.MANHATTAN
    localisation: str = "linear"
    kind = "alp"

    def fit(self, train: FeatureMatrix) -> AlpModel:
        _require_rows(train, "ALP")
        if self.localisation not in LOCALISATION_WEIGHTS:
            raise InvalidArgumentError(
                f"Unknown localisation weights '{self.localisation}'; expected one of {sorted(LOCALISATION_WEIGHTS)}."
            )
        k = clamp_neighbours(self.k, train.n)
        l = clamp_neighbours(self.l, train.n)
        index = build_index(train, self.metric)
        _, nn_dists = index.self_neighbours(k)
        return AlpModel(
            index=index,
            k=k,
            l=l,
            w_k=linear_weights(k),
            w_l=LOCALISATION_WEIGHTS[self.localisation](l),
            nn_dists=nn_dists,
            localisation=self.localisation,
        )
