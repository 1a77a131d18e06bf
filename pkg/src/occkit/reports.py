"""
Evaluation results, their JSON form, and cross-descriptor comparison statistics.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from . import __version__
from .exceptions import InvalidArgumentError

RNG_NAME = "PCG64"


def aggregate_weighted(means: Sequence[float], dataset_ids: Sequence[str]) -> float:
    """
    Mean over the classes of each dataset, then the unweighted mean over datasets.

    Sums are exact (math.fsum), so the result does not depend on task order.

    Raises:
        InvalidArgumentError: If there are no tasks or the two sequences differ in length.
    """
    if len(means) != len(dataset_ids):
        raise InvalidArgumentError(f"Got {len(means)} means for {len(dataset_ids)} dataset ids.")
    if not means:
        raise InvalidArgumentError("Cannot aggregate an empty set of tasks.")

    grouped: Dict[str, List[float]] = {}
    for value, dataset_id in zip(means, dataset_ids):
        grouped.setdefault(str(dataset_id), []).append(float(value))
    dataset_means = [math.fsum(values) / len(values) for values in grouped.values()]
    return math.fsum(dataset_means) / len(dataset_means)


@dataclass
class TaskResult:
    """
    Cross-validated performance of one descriptor on one (dataset, target class) task.

    Attributes:
        dataset_id: Dataset the task was drawn from.
        target_label: The class used as target.
        fold_aurocs: AUROC per fold.
        mean: Mean of the fold AUROCs.
        sd: Sample standard deviation of the fold AUROCs.
        n_target: Number of target rows.
        n_other: Number of other-class rows.
        m: Number of attributes.
        sparsity: Fraction of target values equal to their attribute's mode.
        hyperparameters: Resolved hyperparameters per fold.
    """
    dataset_id: str
    target_label: str
    fold_aurocs: List[float]
    mean: float
    sd: float
    n_target: int = 0
    n_other: int = 0
    m: int = 0
    sparsity: float = 0.0
    hyperparameters: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def key(self) -> Tuple[str, str]:
        return (self.dataset_id, self.target_label)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset_id": self.dataset_id,
            "target_label": self.target_label,
            "fold_aurocs": list(self.fold_aurocs),
            "mean": self.mean,
            "sd": self.sd,
            "n_target": self.n_target,
            "n_other": self.n_other,
            "m": self.m,
            "sparsity": self.sparsity,
            "hyperparameters": [dict(h) for h in self.hyperparameters],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TaskResult":
        return cls(
            dataset_id=data["dataset_id"],
            target_label=data["target_label"],
            fold_aurocs=[float(v) for v in data["fold_aurocs"]],
            mean=float(data["mean"]),
            sd=float(data["sd"]),
            n_target=int(data.get("n_target", 0)),
            n_other=int(data.get("n_other", 0)),
            m=int(data.get("m", 0)),
            sparsity=float(data.get("sparsity", 0.0)),
            hyperparameters=[dict(h) for h in data.get("hyperparameters", [])],
        )


@dataclass
class DescriptorReport:
    """All task results of one descriptor at one set of coefficients."""
    descriptor: str
    coefficients: Dict[str, float]
    tasks: List[TaskResult] = field(default_factory=list)

    def dataset_means(self) -> Dict[str, float]:
        grouped: Dict[str, List[float]] = {}
        for task in self.tasks:
            grouped.setdefault(task.dataset_id, []).append(task.mean)
        return {dataset_id: math.fsum(v) / len(v) for dataset_id, v in sorted(grouped.items())}

    def overall(self) -> Optional[float]:
        if not self.tasks:
            return None
        return aggregate_weighted([t.mean for t in self.tasks], [t.dataset_id for t in self.tasks])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "descriptor": self.descriptor,
            "coefficients": dict(self.coefficients),
            "tasks": [task.to_dict() for task in self.tasks],
            "dataset_means": self.dataset_means(),
            "overall": self.overall(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DescriptorReport":
        return cls(
            descriptor=data["descriptor"],
            coefficients={k: float(v) for k, v in data["coefficients"].items()},
            tasks=[TaskResult.from_dict(t) for t in data["tasks"]],
        )


@dataclass
class EvalReport:
    """
    The result of an `eval` run: one section per descriptor, all on the same folds.
    """
    seed: int
    metric: str
    descriptors: List[DescriptorReport] = field(default_factory=list)
    fingerprints: List[Dict[str, Any]] = field(default_factory=list)
    skipped: List[Dict[str, Any]] = field(default_factory=list)
    version: str = __version__
    rng: str = RNG_NAME
    comparison: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "version": self.version,
            "seed": self.seed,
            "rng": self.rng,
            "metric": self.metric,
            "fingerprints": [dict(f) for f in self.fingerprints],
            "skipped": [dict(s) for s in self.skipped],
            "descriptors": [d.to_dict() for d in self.descriptors],
        }
        if self.comparison is not None:
            data["comparison"] = self.comparison
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalReport":
        return cls(
            seed=int(data["seed"]),
            metric=data["metric"],
            descriptors=[DescriptorReport.from_dict(d) for d in data["descriptors"]],
            fingerprints=list(data.get("fingerprints", [])),
            skipped=list(data.get("skipped", [])),
            version=data.get("version", __version__),
            rng=data.get("rng", RNG_NAME),
            comparison=data.get("comparison"),
        )


def _task_table(reports: Sequence[DescriptorReport]) -> Tuple[List[Tuple[str, str]], np.ndarray]:
    """Mean AUROC per (task, descriptor), over the tasks every descriptor has."""
    if not reports:
        raise InvalidArgumentError("No descriptor results to compare.")
    by_descriptor = [{task.key: task.mean for task in report.tasks} for report in reports]
    keys = sorted(set.intersection(*(set(d) for d in by_descriptor)))
    if not keys:
        raise InvalidArgumentError("The descriptors share no tasks.")
    table = np.array([[d[key] for d in by_descriptor] for key in keys], dtype=np.float64)
    return keys, table


def rank_descriptors(reports: Sequence[DescriptorReport]) -> Dict[str, float]:
    """
    Weighted mean rank of each descriptor; rank 1 is the highest mean AUROC on a task
    and tied descriptors share the average of their ranks.
    """
    keys, table = _task_table(reports)
    ranks = np.vstack([rankdata(-row, method="average") for row in table])
    dataset_ids = [key[0] for key in keys]
    return {
        report.descriptor: aggregate_weighted(list(ranks[:, j]), dataset_ids)
        for j, report in enumerate(reports)
    }


def best_pairs(reports: Sequence[DescriptorReport]) -> List[Dict[str, Any]]:
    """Weighted mean of the per-task better AUROC for every pair of descriptors, best pair first."""
    keys, table = _task_table(reports)
    dataset_ids = [key[0] for key in keys]
    pairs = []
    for a, b in itertools.combinations(range(len(reports)), 2):
        best = np.maximum(table[:, a], table[:, b])
        pairs.append({
            "pair": [reports[a].descriptor, reports[b].descriptor],
            "auroc": aggregate_weighted(list(best), dataset_ids),
        })
    return sorted(pairs, key=lambda p: (-p["auroc"], p["pair"]))


def median_auroc(reports: Sequence[DescriptorReport]) -> Dict[str, float]:
    """Median AUROC across descriptors per task, keyed "dataset/class"."""
    keys, table = _task_table(reports)
    return {f"{dataset_id}/{label}": float(np.median(row)) for (dataset_id, label), row in zip(keys, table)}


def compare_descriptors(reports: Sequence[DescriptorReport]) -> Dict[str, Any]:
    return {
        "mean_ranks": rank_descriptors(reports),
        "best_pairs": best_pairs(reports),
        "median_auroc": median_auroc(reports),
    }


def summarise(report: EvalReport) -> str:
    """Human-readable one-line-per-descriptor summary."""
    lines = []
    for section in report.descriptors:
        overall = section.overall()
        value = "n/a" if overall is None else f"{overall:.4f}"
        lines.append(f"{section.descriptor}: weighted mean AUROC {value} over {len(section.tasks)} task(s)")
    for skipped in report.skipped:
        lines.append(f"skipped {skipped['dataset_id']}/{skipped['target_label']}: {skipped['reason']}")
    return "\n".join(lines)
