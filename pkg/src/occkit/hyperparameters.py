"""
Hyperparameter reparametrisation, the shipped defaults and the tuning grids.

Neighbour counts are reparametrised as a * ln n (n the target training size), the SVM
kernel width as c' * m (m the number of attributes). Resolved counts are rounded to
the nearest integer and clamped to [1, n - 1].
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .descriptors import DescriptorKind, make_descriptor
from .descriptors.isolation import DEFAULT_SUBSAMPLE_CAP, DEFAULT_TREES
from .descriptors.nearest_neighbour import clamp_neighbours
from .exceptions import InvalidArgumentError
from .models import DataDescriptor
from .neighbors import Metric

# Optimal default coefficients.
DEFAULT_COEFFICIENTS: Dict[DescriptorKind, Dict[str, float]] = {
    DescriptorKind.NND: {"k": 1},
    DescriptorKind.LNND: {"k_coef": 3.4},
    DescriptorKind.LOF: {"k_coef": 2.5},
    DescriptorKind.SVM: {"nu": 0.20, "c_coef": 0.25},
    DescriptorKind.ALP: {"k_coef": 5.5, "l_coef": 6.0},
    DescriptorKind.MD: {},
    DescriptorKind.IF: {},
    DescriptorKind.EIF: {},
}


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def clamp_count(value: float, n: int) -> int:
    """Round to the nearest integer in [1, n - 1]; clamping is logged as a warning."""
    return clamp_neighbours(round_half_up(value), n)


def coefficients_with_defaults(kind: DescriptorKind, coefficients: Optional[Mapping[str, float]] = None) -> Dict[str, float]:
    """Fill missing coefficients from the defaults, rejecting names the descriptor does not take."""
    kind = DescriptorKind(kind)
    merged = dict(DEFAULT_COEFFICIENTS[kind])
    for name, value in (coefficients or {}).items():
        if value is None:
            continue
        if name not in merged:
            raise InvalidArgumentError(
                f"Descriptor '{kind.value}' has no coefficient '{name}'; expected one of {sorted(merged)}."
            )
        merged[name] = float(value)
    return merged


def resolve_hyperparameters(
    kind: DescriptorKind, coefficients: Optional[Mapping[str, float]], n: int, m: int
) -> Dict[str, Any]:
    """
    Turn (reparametrised) coefficients into concrete hyperparameter values.

    Args:
        kind: Descriptor kind.
        coefficients: Coefficients such as {"k_coef": 5.5}; missing ones take the defaults.
        n: Number of target training instances.
        m: Number of attributes.

    Returns:
        Concrete values, e.g. {"k": 27, "l": 30} for ALP with the defaults at n = 148.
    """
    kind = DescriptorKind(kind)
    coefficients = coefficients_with_defaults(kind, coefficients)
    log_n = math.log(n) if n > 0 else 0.0

    if kind is DescriptorKind.NND:
        return {"k": clamp_count(coefficients["k"], n)}
    if kind in (DescriptorKind.LNND, DescriptorKind.LOF):
        return {"k": clamp_count(coefficients["k_coef"] * log_n, n)}
    if kind is DescriptorKind.ALP:
        return {
            "k": clamp_count(coefficients["k_coef"] * log_n, n),
            "l": clamp_count(coefficients["l_coef"] * log_n, n),
        }
    if kind is DescriptorKind.SVM:
        return {"nu": coefficients["nu"], "c": coefficients["c_coef"] * m}
    if kind in (DescriptorKind.IF, DescriptorKind.EIF):
        return {"t": DEFAULT_TREES, "psi": int(min(DEFAULT_SUBSAMPLE_CAP, n))}
    return {}


@dataclass(frozen=True)
class DescriptorSpec:
    """
    A descriptor with coefficients still to be resolved against the training data.

    Attributes:
        kind: Descriptor kind.
        coefficients: Reparametrised coefficients; missing ones take the defaults.
        metric: Dissimilarity for the nearest-neighbour descriptors.
        seed: Seed for the isolation forests.
        options: Fixed extra hyperparameters (e.g. SVM tolerance, tree count).
    """

    kind: DescriptorKind
    coefficients: Mapping[str, float] = field(default_factory=dict)
    metric: Metric = Metric.MANHATTAN
    seed: int = 0
    options: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", DescriptorKind(self.kind))
        object.__setattr__(self, "metric", Metric(self.metric))
        coefficients_with_defaults(self.kind, self.coefficients)

    def resolve(self, n: int, m: int) -> Dict[str, Any]:
        return {**resolve_hyperparameters(self.kind, self.coefficients, n, m), **self.options}

    def build(self, n: int, m: int) -> DataDescriptor:
        return make_descriptor(self.kind, self.resolve(n, m), metric=self.metric, seed=self.seed)

    def with_coefficients(self, coefficients: Mapping[str, float]) -> "DescriptorSpec":
        return DescriptorSpec(self.kind, dict(coefficients), self.metric, self.seed, self.options)


@dataclass(frozen=True)
class GridAxis:
    """
    One tuning axis: values start, start + resolution, ... up to stop, and the size of
    the centred rolling-mean window along this axis.
    """

    name: str
    start: float
    stop: float
    resolution: float
    window: int

    def __post_init__(self):
        if self.resolution <= 0:
            raise InvalidArgumentError(f"Axis '{self.name}' needs a positive resolution.")
        if self.window < 1 or self.window % 2 == 0:
            raise InvalidArgumentError(f"Axis '{self.name}' needs an odd window size, got {self.window}.")
        if self.stop < self.start:
            raise InvalidArgumentError(f"Axis '{self.name}' has stop {self.stop} below start {self.start}.")

    def values(self) -> np.ndarray:
        count = int(math.floor((self.stop - self.start) / self.resolution + 1e-9)) + 1
        return np.round(self.start + self.resolution * np.arange(count), 10)

    def with_range(self, start: float, stop: float) -> "GridAxis":
        return GridAxis(self.name, float(start), float(stop), self.resolution, self.window)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "start": self.start,
            "stop": self.stop,
            "resolution": self.resolution,
            "window": self.window,
        }


@dataclass(frozen=True)
class HyperGrid:
    """The tuning axes of one descriptor; no axes means a single point."""

    axes: Tuple[GridAxis, ...] = ()

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(axis.values()) for axis in self.axes)

    @property
    def windows(self) -> Tuple[int, ...]:
        return tuple(axis.window for axis in self.axes)

    def points(self) -> Iterator[Dict[str, float]]:
        """Every grid point as a coefficient dictionary, in C order."""
        names = [axis.name for axis in self.axes]
        for combination in itertools.product(*(axis.values() for axis in self.axes)):
            yield {name: float(value) for name, value in zip(names, combination)}

    def point_at(self, index: Sequence[int]) -> Dict[str, float]:
        return {axis.name: float(axis.values()[i]) for axis, i in zip(self.axes, index)}

    def override(self, ranges: Mapping[str, Tuple[float, float]]) -> "HyperGrid":
        """Replace axis ranges, keeping resolutions and windows."""
        names = {axis.name for axis in self.axes}
        unknown = set(ranges) - names
        if unknown:
            raise InvalidArgumentError(f"Unknown grid axes {sorted(unknown)}; expected some of {sorted(names)}.")
        return HyperGrid(
            tuple(axis.with_range(*ranges[axis.name]) if axis.name in ranges else axis for axis in self.axes)
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"axes": [axis.to_dict() for axis in self.axes]}


DEFAULT_GRIDS: Dict[DescriptorKind, HyperGrid] = {
    DescriptorKind.NND: HyperGrid((GridAxis("k", 1, 25, 1, 3),)),
    DescriptorKind.LNND: HyperGrid((GridAxis("k_coef", 0.5, 12.0, 0.01, 101),)),
    DescriptorKind.LOF: HyperGrid((GridAxis("k_coef", 0.5, 12.0, 0.01, 101),)),
    DescriptorKind.SVM: HyperGrid(
        (GridAxis("nu", 0.05, 0.95, 0.1, 11), GridAxis("c_coef", 0.05, 1.95, 0.1, 11))
    ),
    DescriptorKind.ALP: HyperGrid(
        (GridAxis("k_coef", 0.5, 12.0, 0.1, 11), GridAxis("l_coef", 0.5, 12.0, 0.1, 11))
    ),
    DescriptorKind.MD: HyperGrid(),
    DescriptorKind.IF: HyperGrid(),
    DescriptorKind.EIF: HyperGrid(),
}


def default_grid(kind: DescriptorKind) -> HyperGrid:
    return DEFAULT_GRIDS[DescriptorKind(kind)]


def grid_names(kind: DescriptorKind) -> List[str]:
    return [axis.name for axis in default_grid(kind).axes]
