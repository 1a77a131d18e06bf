"""
The eight data descriptors behind a shared fit/score contract.
"""
from enum import Enum
from typing import Any, Dict, Mapping, Type

from ..exceptions import InvalidArgumentError
from ..models import DataDescription, DataDescriptor
from ..neighbors import Metric
from .gaussian import MahalanobisDistance, MdModel
from .isolation import IsolationForest, IsolationForestModel, SplitMode
from .nearest_neighbour import (
    AlpModel,
    AverageLocalisedProximity,
    LnndModel,
    LocalisedNearestNeighbourDistance,
    LocalOutlierFactor,
    LofModel,
    NearestNeighbourDistance,
    NndModel,
)
from .svm import OcSvmModel, OneClassSvm


class DescriptorKind(str, Enum):
    NND = "nnd"
    LNND = "lnnd"
    LOF = "lof"
    MD = "md"
    SVM = "svm"
    IF = "if"
    EIF = "eif"
    ALP = "alp"

    @classmethod
    def parse(cls, value: str) -> "DescriptorKind":
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidArgumentError(
                f"Unknown descriptor '{value}'; expected one of {[k.value for k in cls]}."
            ) from None


# Fitted-model class per kind, for loading model files.
DESCRIPTIONS: Dict[DescriptorKind, Type[DataDescription]] = {
    DescriptorKind.NND: NndModel,
    DescriptorKind.LNND: LnndModel,
    DescriptorKind.LOF: LofModel,
    DescriptorKind.MD: MdModel,
    DescriptorKind.SVM: OcSvmModel,
    DescriptorKind.IF: IsolationForestModel,
    DescriptorKind.EIF: IsolationForestModel,
    DescriptorKind.ALP: AlpModel,
}


def make_descriptor(
    kind: DescriptorKind,
    hyperparameters: Mapping[str, Any],
    metric: Metric = Metric.MANHATTAN,
    seed: int = 0,
) -> DataDescriptor:
    """
    Instantiate a descriptor from concrete hyperparameter values.

    Args:
        kind: Which descriptor.
        hyperparameters: Concrete values, e.g. {"k": 27, "l": 30} for ALP or
            {"nu": 0.2, "c": 2.5} for SVM.
        metric: Dissimilarity for the nearest-neighbour descriptors.
        seed: Seed for the isolation forests.
    """
    kind = DescriptorKind(kind)
    metric = Metric(metric)
    if kind is DescriptorKind.NND:
        return NearestNeighbourDistance(k=int(hyperparameters["k"]), metric=metric)
    if kind is DescriptorKind.LNND:
        return LocalisedNearestNeighbourDistance(k=int(hyperparameters["k"]), metric=metric)
    if kind is DescriptorKind.LOF:
        return LocalOutlierFactor(k=int(hyperparameters["k"]), metric=metric)
    if kind is DescriptorKind.ALP:
        return AverageLocalisedProximity(
            k=int(hyperparameters["k"]),
            l=int(hyperparameters["l"]),
            metric=metric,
            localisation=str(hyperparameters.get("localisation", "linear")),
        )
    if kind is DescriptorKind.MD:
        return MahalanobisDistance()
    if kind is DescriptorKind.SVM:
        options = {"nu": float(hyperparameters["nu"]), "c": float(hyperparameters["c"])}
        for name in ("tol", "max_iterations"):
            if name in hyperparameters:
                options[name] = hyperparameters[name]
        return OneClassSvm(**options)
    mode = SplitMode.AXIS if kind is DescriptorKind.IF else SplitMode.EXTENDED
    return IsolationForest(
        t=int(hyperparameters.get("t", 100)),
        psi=hyperparameters.get("psi"),
        mode=mode,
        seed=seed,
    )


__all__ = [
    "AlpModel",
    "AverageLocalisedProximity",
    "DESCRIPTIONS",
    "DescriptorKind",
    "IsolationForest",
    "IsolationForestModel",
    "LnndModel",
    "LocalOutlierFactor",
    "LocalisedNearestNeighbourDistance",
    "LofModel",
    "MahalanobisDistance",
    "MdModel",
    "NearestNeighbourDistance",
    "NndModel",
    "OcSvmModel",
    "OneClassSvm",
    "SplitMode",
    "make_descriptor",
]
