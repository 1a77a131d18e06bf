"""
Evaluation protocol: AUROC, stratified folds, per-task cross-validation, grid search
with rolling-mean smoothing, and leave-one-dataset-out selection of defaults.
"""
from __future__ import annotations

import asyncio
import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.ndimage import convolve
from scipy.stats import rankdata
from tqdm import tqdm

from .exceptions import InsufficientDataError, InvalidArgumentError, OccError
from .hyperparameters import DescriptorSpec, HyperGrid
from .models import FeatureMatrix
from .preprocessing import apply_scaler, fit_iqr_scaler, scale_queries, sparsity
from .reports import DescriptorReport, TaskResult, aggregate_weighted

logger = logging.getLogger(__name__)

DEFAULT_FOLDS = 5
MIN_TARGET_ROWS = 10
MIN_OTHER_ROWS = 5


def auroc(target_scores: Sequence[float], other_scores: Sequence[float]) -> float:
    """
    Probability that a random target instance outscores a random other instance,
    ties counting half (the Mann-Whitney statistic over |T| |O|).

    Raises:
        InvalidArgumentError: If either side is empty.
    """
    target = np.asarray(target_scores, dtype=np.float64).ravel()
    other = np.asarray(other_scores, dtype=np.float64).ravel()
    if target.size == 0 or other.size == 0:
        raise InvalidArgumentError("AUROC needs at least one target and one other score.")
    ranks = rankdata(np.concatenate([target, other]), method="average")
    n_t, n_o = target.size, other.size
    u = ranks[:n_t].sum() - n_t * (n_t + 1) / 2.0
    return float(u / (n_t * n_o))


@dataclass(frozen=True, eq=False)
class OccTask:
    """One target class of one dataset; `other` holds the rows of every other class."""
    dataset_id: str
    target_label: str
    target: FeatureMatrix
    other: FeatureMatrix

    @property
    def key(self) -> Tuple[str, str]:
        return (self.dataset_id, self.target_label)


@dataclass(frozen=True)
class Fold:
    index: int
    train_ids: np.ndarray
    target_test_ids: np.ndarray
    other_test_ids: np.ndarray


@dataclass(frozen=True)
class FoldPlan:
    folds: Tuple[Fold, ...]
    seed: int

    def __len__(self) -> int:
        return len(self.folds)


def _round_robin(n: int, n_folds: int, rng: np.random.Generator) -> List[np.ndarray]:
    order = rng.permutation(n)
    return [np.sort(order[f::n_folds]) for f in range(n_folds)]


def make_folds(
    task: OccTask,
    seed: int,
    n_folds: int = DEFAULT_FOLDS,
    min_target_rows: int = MIN_TARGET_ROWS,
    min_other_rows: int = MIN_OTHER_ROWS,
) -> FoldPlan:
    """
    Stratified fold plan: each class is shuffled and dealt round-robin into the folds.

    The training rows of fold f are the target rows of every other fold; other-class
    rows only ever appear in test sets.

    Raises:
        InsufficientDataError: If there are too few target or other rows.
    """
    if task.target.n < max(min_target_rows, 2 * n_folds):
        raise InsufficientDataError(
            f"Task {task.dataset_id}/{task.target_label} has {task.target.n} target rows; "
            f"at least {max(min_target_rows, 2 * n_folds)} are needed."
        )
    if task.other.n < max(min_other_rows, n_folds):
        raise InsufficientDataError(
            f"Task {task.dataset_id}/{task.target_label} has {task.other.n} other rows; "
            f"at least {max(min_other_rows, n_folds)} are needed."
        )

    rng = np.random.Generator(np.random.PCG64(seed))
    target_folds = _round_robin(task.target.n, n_folds, rng)
    other_folds = _round_robin(task.other.n, n_folds, rng)
    folds = tuple(
        Fold(
            index=f,
            train_ids=np.sort(np.concatenate([target_folds[g] for g in range(n_folds) if g != f])),
            target_test_ids=target_folds[f],
            other_test_ids=other_folds[f],
        )
        for f in range(n_folds)
    )
    return FoldPlan(folds=folds, seed=int(seed))


@dataclass(frozen=True, eq=False)
class ScaledFold:
    train: FeatureMatrix
    target_test: np.ndarray
    other_test: np.ndarray


class EvaluationCache:
    """
    Memo of scaled folds and fold AUROCs, keyed by task, fold and resolved hyperparameters.

    Grid points that resolve to the same concrete hyperparameters share one fit.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._folds: Dict[Hashable, ScaledFold] = {}
        self._aurocs: Dict[Hashable, float] = {}
        self.hits = 0
        self.misses = 0

    def scaled_fold(self, task: OccTask, fold: Fold, plan_seed: int) -> ScaledFold:
        key = (task.key, plan_seed, fold.index)
        with self._lock:
            cached = self._folds.get(key)
        if cached is not None:
            return cached
        train = task.target.take(fold.train_ids)
        scaler = fit_iqr_scaler(train)
        scaled = ScaledFold(
            train=apply_scaler(scaler, train),
            target_test=scale_queries(scaler, task.target.values[fold.target_test_ids]),
            other_test=scale_queries(scaler, task.other.values[fold.other_test_ids]),
        )
        with self._lock:
            self._folds[key] = scaled
        return scaled

    def lookup(self, key: Hashable) -> Optional[float]:
        with self._lock:
            value = self._aurocs.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def store(self, key: Hashable, value: float) -> None:
        with self._lock:
            self._aurocs[key] = value


def _freeze(values: Mapping[str, Any]) -> Tuple:
    return tuple(sorted((k, v) for k, v in values.items()))


def evaluate_task(
    spec: DescriptorSpec,
    task: OccTask,
    plan: FoldPlan,
    cache: Optional[EvaluationCache] = None,
) -> TaskResult:
    """
    Cross-validate a descriptor on one task.

    Per fold: fit an IQR scaler on the target training rows, scale every row with it,
    fit the descriptor on the scaled training rows only, and compute the AUROC of the
    target-test scores against the other-test scores.

    Raises:
        OccError: Any descriptor error, prefixed with the dataset, class and fold.
    """
    cache = cache if cache is not None else EvaluationCache()
    fold_aurocs: List[float] = []
    resolved: List[Dict[str, Any]] = []

    for fold in plan.folds:
        try:
            scaled = cache.scaled_fold(task, fold, plan.seed)
            hyperparameters = spec.resolve(scaled.train.n, scaled.train.m)
            key = (task.key, plan.seed, fold.index, spec.kind.value, spec.metric.value, spec.seed, _freeze(hyperparameters))
            value = cache.lookup(key)
            if value is None:
                description = spec.build(scaled.train.n, scaled.train.m).fit(scaled.train)
                value = auroc(description.score_many(scaled.target_test), description.score_many(scaled.other_test))
                cache.store(key, value)
        except OccError as e:
            e.add_context(f"{task.dataset_id}/{task.target_label} fold {fold.index}")
            raise
        logger.debug(f"{spec.kind.value} on {task.dataset_id}/{task.target_label} fold {fold.index}: AUROC {value:.4f}")
        fold_aurocs.append(value)
        resolved.append(hyperparameters)

    mean = math.fsum(fold_aurocs) / len(fold_aurocs)
    sd = float(np.std(fold_aurocs, ddof=1)) if len(fold_aurocs) > 1 else 0.0
    return TaskResult(
        dataset_id=task.dataset_id,
        target_label=task.target_label,
        fold_aurocs=fold_aurocs,
        mean=mean,
        sd=sd,
        n_target=task.target.n,
        n_other=task.other.n,
        m=task.target.m,
        sparsity=sparsity(task.target),
        hyperparameters=resolved,
    )


def evaluate_descriptor(
    spec: DescriptorSpec,
    tasks: Sequence[OccTask],
    plans: Mapping[Tuple[str, str], FoldPlan],
    cache: Optional[EvaluationCache] = None,
    threads: int = 1,
) -> DescriptorReport:
    """Evaluate one descriptor on every task with the given (shared) fold plans."""
    if threads < 1:
        raise InvalidArgumentError(f"Thread count must be positive, got {threads}.")
    logger.info(f"Evaluating {spec.kind.value} on {len(tasks)} task(s)")
    cache = cache if cache is not None else EvaluationCache()

    async def run_all() -> List[TaskResult]:
        results: List[TaskResult] = []
        for i in range(0, len(tasks), threads):
            batch = tasks[i:i + threads]
            results.extend(
                await asyncio.gather(*(asyncio.to_thread(evaluate_task, spec, t, plans[t.key], cache) for t in batch))
            )
        return results

    results = asyncio.run(run_all())
    return DescriptorReport(
        descriptor=spec.kind.value,
        coefficients={k: float(v) for k, v in spec.coefficients.items()},
        tasks=results,
    )


def rolling_mean(values: np.ndarray, window: Union[int, Sequence[int]]) -> np.ndarray:
    """
    Centred rolling mean; each cell becomes the mean over the part of its window that
    lies inside the array, so windows shrink at the edges.

    Raises:
        InvalidArgumentError: If a window size is even or not positive, or the number of
            window sizes does not match the array's dimensions.
    """
    values = np.asarray(values, dtype=np.float64)
    windows = (window,) * values.ndim if np.isscalar(window) else tuple(window)
    if len(windows) != values.ndim:
        raise InvalidArgumentError(f"Got {len(windows)} window size(s) for a {values.ndim}-D array.")
    for w in windows:
        if int(w) != w or w < 1 or w % 2 == 0:
            raise InvalidArgumentError(f"Window sizes must be odd positive integers, got {w}.")
    if values.ndim == 0 or values.size == 0:
        return values.copy()

    kernel = np.ones(tuple(int(w) for w in windows))
    sums = convolve(values, kernel, mode="constant", cval=0.0)
    counts = convolve(np.ones_like(values), kernel, mode="constant", cval=0.0)
    return sums / counts


def aggregate_surfaces(surfaces: np.ndarray, tasks: Sequence[OccTask]) -> np.ndarray:
    """
    Pointwise aggregate_weighted over per-task surfaces of shape (tasks, *grid).

    Tasks and datasets are visited in sorted order, so the result is independent of
    the order of `tasks`.
    """
    if len(tasks) == 0:
        raise InvalidArgumentError("Cannot aggregate an empty set of tasks.")
    grouped: Dict[str, List[int]] = {}
    for i in sorted(range(len(tasks)), key=lambda i: tasks[i].key):
        grouped.setdefault(tasks[i].dataset_id, []).append(i)
    dataset_means = [surfaces[indices].mean(axis=0) for _, indices in sorted(grouped.items())]
    return np.mean(dataset_means, axis=0)


@dataclass
class GridResult:
    """
    Attributes:
        descriptor: Descriptor kind.
        grid: The grid searched.
        raw: Weighted mean AUROC per grid point.
        smoothed: `raw` after the rolling mean.
        best: Coefficients at the smoothed maximum.
        best_value: Smoothed value there.
        resolved: Per task ("dataset/label"), the hyperparameters `best` resolves to on
            each fold's training rows.
    """
    descriptor: str
    grid: HyperGrid
    raw: np.ndarray
    smoothed: np.ndarray
    best: Dict[str, float]
    best_value: float
    resolved: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "descriptor": self.descriptor,
            "grid": self.grid.to_dict(),
            "raw": np.asarray(self.raw).tolist(),
            "smoothed": np.asarray(self.smoothed).tolist(),
            "best": dict(self.best),
            "best_value": self.best_value,
            "resolved_hyperparameters": {task: [dict(h) for h in folds] for task, folds in self.resolved.items()},
        }


def select_best(grid: HyperGrid, raw: np.ndarray) -> Tuple[np.ndarray, Dict[str, float], float]:
    """Smooth a raw surface and pick its maximum; ties go to the smallest coefficients."""
    smoothed = rolling_mean(raw, grid.windows) if grid.axes else np.asarray(raw, dtype=np.float64)
    flat = int(np.argmax(smoothed.ravel()))
    index = np.unravel_index(flat, smoothed.shape) if grid.axes else ()
    return smoothed, grid.point_at(index), float(smoothed.ravel()[flat])


def resolve_per_fold(
    spec: DescriptorSpec,
    coefficients: Mapping[str, float],
    tasks: Sequence[OccTask],
    plans: Mapping[Tuple[str, str], FoldPlan],
) -> Dict[str, List[Dict[str, Any]]]:
    """Hyperparameters the coefficients resolve to on every fold of every task."""
    chosen = spec.with_coefficients({**spec.coefficients, **coefficients})
    return {
        f"{task.dataset_id}/{task.target_label}": [
            chosen.resolve(len(fold.train_ids), task.target.m) for fold in plans[task.key].folds
        ]
        for task in sorted(tasks, key=lambda t: t.key)
    }


async def _evaluate_points(
    spec: DescriptorSpec,
    tasks: Sequence[OccTask],
    points: List[Dict[str, float]],
    plans: Mapping[Tuple[str, str], FoldPlan],
    cache: EvaluationCache,
    threads: int,
    show_progress: bool,
) -> List[List[float]]:
    """Mean AUROC per (point, task), evaluated in batches of `threads` worker threads."""

    def evaluate_point(point: Dict[str, float]) -> List[float]:
        point_spec = spec.with_coefficients({**spec.coefficients, **point})
        return [evaluate_task(point_spec, task, plans[task.key], cache).mean for task in tasks]

    batches = [points[i:i + threads] for i in range(0, len(points), threads)]
    results: List[List[float]] = []
    with tqdm(total=len(points), desc=f"grid {spec.kind.value}", disable=not show_progress, leave=False) as progress:
        for batch in batches:
            batch_results = await asyncio.gather(*(asyncio.to_thread(evaluate_point, p) for p in batch))
            results.extend(batch_results)
            progress.update(len(batch))
    return results


def task_surfaces(
    spec: DescriptorSpec,
    tasks: Sequence[OccTask],
    grid: HyperGrid,
    plans: Mapping[Tuple[str, str], FoldPlan],
    cache: Optional[EvaluationCache] = None,
    threads: int = 1,
    show_progress: bool = False,
) -> np.ndarray:
    """Mean AUROC of every task at every grid point, shape (tasks, *grid.shape)."""
    if not tasks:
        raise InvalidArgumentError("Grid search needs at least one task.")
    if threads < 1:
        raise InvalidArgumentError(f"Thread count must be positive, got {threads}.")
    cache = cache if cache is not None else EvaluationCache()
    points = list(grid.points())
    logger.info(f"Grid search for {spec.kind.value}: {len(points)} point(s) x {len(tasks)} task(s)")
    per_point = asyncio.run(_evaluate_points(spec, tasks, points, plans, cache, threads, show_progress))
    logger.info(f"Grid search for {spec.kind.value} done ({cache.hits} cached fold results reused)")
    return np.asarray(per_point, dtype=np.float64).T.reshape((len(tasks),) + grid.shape)


def make_plans(tasks: Sequence[OccTask], seed: int, n_folds: int = DEFAULT_FOLDS) -> Dict[Tuple[str, str], FoldPlan]:
    return {task.key: make_folds(task, seed, n_folds) for task in tasks}


def grid_search(
    spec: DescriptorSpec,
    tasks: Sequence[OccTask],
    grid: HyperGrid,
    seed: int,
    plans: Optional[Mapping[Tuple[str, str], FoldPlan]] = None,
    cache: Optional[EvaluationCache] = None,
    threads: int = 1,
    show_progress: bool = False,
) -> GridResult:
    """
    Weighted mean AUROC over all tasks at every grid point, smoothed with the grid's
    rolling-mean windows; returns the surface and its maximising coefficients.
    """
    plans = plans if plans is not None else make_plans(tasks, seed)
    surfaces = task_surfaces(spec, tasks, grid, plans, cache, threads, show_progress)
    raw = aggregate_surfaces(surfaces, tasks)
    smoothed, best, best_value = select_best(grid, raw)
    resolved = resolve_per_fold(spec, best, tasks, plans)
    return GridResult(spec.kind.value, grid, raw, smoothed, best, best_value, resolved)


@dataclass
class HeldOutResult:
    """The coefficients chosen without a dataset, and its tasks evaluated at them."""
    dataset_id: str
    coefficients: Dict[str, float]
    selection_value: float
    tasks: List[TaskResult] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return aggregate_weighted([t.mean for t in self.tasks], [t.dataset_id for t in self.tasks])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset_id": self.dataset_id,
            "coefficients": dict(self.coefficients),
            "selection_value": self.selection_value,
            "mean": self.mean,
            "tasks": [t.to_dict() for t in self.tasks],
        }


@dataclass
class LodoResult:
    descriptor: str
    grid: GridResult
    held_out: List[HeldOutResult]

    def overall(self) -> float:
        """Weighted mean of the held-out AUROCs."""
        tasks = [t for h in self.held_out for t in h.tasks]
        return aggregate_weighted([t.mean for t in tasks], [t.dataset_id for t in tasks])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "descriptor": self.descriptor,
            "grid": self.grid.to_dict(),
            "held_out": [h.to_dict() for h in self.held_out],
            "overall": self.overall(),
        }


def leave_one_dataset_out(
    spec: DescriptorSpec,
    tasks: Sequence[OccTask],
    grid: HyperGrid,
    seed: int,
    plans: Optional[Mapping[Tuple[str, str], FoldPlan]] = None,
    cache: Optional[EvaluationCache] = None,
    threads: int = 1,
    show_progress: bool = False,
) -> LodoResult:
    """
    For each dataset, choose coefficients by grid search over the other datasets' tasks
    and evaluate the held-out dataset's tasks at them.

    Raises:
        InvalidArgumentError: If the tasks come from fewer than two datasets.
    """
    dataset_ids = sorted({task.dataset_id for task in tasks})
    if len(dataset_ids) < 2:
        raise InvalidArgumentError(
            f"Leave-one-dataset-out needs at least 2 datasets, got {len(dataset_ids)}."
        )
    plans = plans if plans is not None else make_plans(tasks, seed)
    cache = cache if cache is not None else EvaluationCache()
    surfaces = task_surfaces(spec, tasks, grid, plans, cache, threads, show_progress)

    raw = aggregate_surfaces(surfaces, tasks)
    smoothed, best, best_value = select_best(grid, raw)
    full = GridResult(spec.kind.value, grid, raw, smoothed, best, best_value, resolve_per_fold(spec, best, tasks, plans))

    held_out = []
    for dataset_id in dataset_ids:
        keep = [i for i, task in enumerate(tasks) if task.dataset_id != dataset_id]
        _, chosen, value = select_best(grid, aggregate_surfaces(surfaces[keep], [tasks[i] for i in keep]))
        chosen_spec = spec.with_coefficients({**spec.coefficients, **chosen})
        results = [
            evaluate_task(chosen_spec, task, plans[task.key], cache)
            for task in tasks
            if task.dataset_id == dataset_id
        ]
        logger.info(f"Held out {dataset_id}: chose {chosen}")
        held_out.append(HeldOutResult(dataset_id, chosen, value, results))
    return LodoResult(full.descriptor, full, held_out)
