"""
Labelled datasets, one-class tasks drawn from them, and seeded synthetic data.

Wherever a data path is accepted, `builtin:<name>` selects one of the bundled public
datasets (iris, wine, breast_cancer, tips) or seeded generators (blobs, rings, ridge)
instead of a CSV file.
"""
import functools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .evaluation import MIN_OTHER_ROWS, MIN_TARGET_ROWS, OccTask
from .exceptions import DataFileError
from .models import FeatureMatrix, validate_matrix
from .utils import fingerprint, read_labelled_table, read_table

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"
ROWS_PER_CLASS = 50
DATA_DIR = Path(__file__).parent / "data"


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _blobs() -> Tuple[np.ndarray, List[str]]:
    """Three overlapping Gaussian blobs in four attributes with unequal spreads."""
    rng = _generator(11)
    centres = np.array([[0.0, 0.0, 0.0, 0.0], [2.5, 1.0, 0.0, -1.0], [1.0, 3.0, 1.5, 0.5]])
    spreads = np.array([0.6, 1.0, 1.4])
    X = np.vstack([c + s * rng.standard_normal((ROWS_PER_CLASS, 4)) for c, s in zip(centres, spreads)])
    labels = [name for name in ("a", "b", "c") for _ in range(ROWS_PER_CLASS)]
    return X, labels


def _rings() -> Tuple[np.ndarray, List[str]]:
    """Three noisy concentric rings in the plane plus one uninformative attribute."""
    rng = _generator(23)
    blocks = []
    for radius in (1.0, 2.0, 3.0):
        angle = rng.uniform(0.0, 2.0 * np.pi, ROWS_PER_CLASS)
        r = radius + 0.25 * rng.standard_normal(ROWS_PER_CLASS)
        noise = rng.uniform(-1.0, 1.0, ROWS_PER_CLASS)
        blocks.append(np.column_stack([r * np.cos(angle), r * np.sin(angle), noise]))
    labels = [name for name in ("inner", "middle", "outer") for _ in range(ROWS_PER_CLASS)]
    return np.vstack(blocks), labels


def _ridge() -> Tuple[np.ndarray, List[str]]:
    """Three segments along a curved ridge in three attributes, with rounded values."""
    rng = _generator(37)
    blocks = []
    for start in (0.0, 1.0, 2.0):
        t = rng.uniform(start, start + 1.2, ROWS_PER_CLASS)
        block = np.column_stack([t, np.sin(2.0 * t), 0.5 * t ** 2])
        blocks.append(np.round(block + 0.15 * rng.standard_normal(block.shape), 1))
    labels = [name for name in ("low", "mid", "high") for _ in range(ROWS_PER_CLASS)]
    return np.vstack(blocks), labels


def _bundled(filename: str) -> Tuple[np.ndarray, List[str]]:
    values, labels, _ = read_labelled_table(DATA_DIR / filename)
    return values, labels


SYNTHETIC_DATASETS: Dict[str, Callable[[], Tuple[np.ndarray, List[str]]]] = {
    "blobs": _blobs,
    "rings": _rings,
    "ridge": _ridge,
}

# UCI iris, wine and breast cancer (Wisconsin diagnostic), and the restaurant tips
# data labelled by meal time.
PUBLIC_DATASETS: Dict[str, Callable[[], Tuple[np.ndarray, List[str]]]] = {
    name: functools.partial(_bundled, f"{name}.csv") for name in ("iris", "wine", "breast_cancer", "tips")
}

BUILTIN_DATASETS = {**PUBLIC_DATASETS, **SYNTHETIC_DATASETS}


@dataclass(frozen=True, eq=False)
class LabelledDataset:
    dataset_id: str
    features: FeatureMatrix
    labels: Tuple[str, ...]

    @property
    def classes(self) -> List[str]:
        return sorted(set(self.labels))

    def fingerprint(self) -> Dict[str, Any]:
        return {"dataset_id": self.dataset_id, **fingerprint(self.features.values)}


def _builtin_name(path: str) -> Optional[str]:
    if not str(path).startswith(BUILTIN_PREFIX):
        return None
    name = str(path)[len(BUILTIN_PREFIX):]
    if name not in BUILTIN_DATASETS:
        raise DataFileError(f"Unknown built-in dataset '{name}'; expected one of {sorted(BUILTIN_DATASETS)}.")
    return name


def load_labelled(path: str) -> LabelledDataset:
    """
    Load a labelled dataset from a CSV file (last column = class) or a built-in name.

    Returns:
        The dataset, identified by the file stem or the built-in name.
    """
    name = _builtin_name(path)
    if name is not None:
        values, labels = BUILTIN_DATASETS[name]()
        dataset_id = name
    else:
        values, labels, _ = read_labelled_table(path)
        dataset_id = Path(path).stem
    logger.info(f"Loaded {dataset_id}: {values.shape[0]} rows, {values.shape[1] if values.ndim == 2 else 0} attributes")
    return LabelledDataset(dataset_id, validate_matrix(values), tuple(labels))


def load_matrix(path: str, allow_empty: bool = False) -> np.ndarray:
    """
    Load unlabelled attribute values; built-in datasets drop their label column.

    Args:
        path: CSV file path or `builtin:<name>`.
        allow_empty: Accept a header-only file (zero rows).
    """
    name = _builtin_name(path)
    if name is not None:
        return BUILTIN_DATASETS[name]()[0]
    values, _ = read_table(path)
    if values.shape[0] == 0 and allow_empty:
        return values
    return validate_matrix(values).values


def tasks_from_dataset(
    dataset: LabelledDataset,
    targets: Optional[Sequence[str]] = None,
    min_target_rows: int = MIN_TARGET_ROWS,
    min_other_rows: int = MIN_OTHER_ROWS,
) -> Tuple[List[OccTask], List[Dict[str, Any]]]:
    """
    One task per target class: that class against all others combined.

    Args:
        dataset: The labelled dataset.
        targets: Target labels to use; None means every class.
        min_target_rows: Classes with fewer rows are skipped.
        min_other_rows: Classes leaving fewer other rows are skipped.

    Returns:
        A tuple of (tasks, skipped-class records with a reason).
    """
    labels = np.asarray(dataset.labels)
    wanted = dataset.classes if targets is None else [str(t) for t in targets]
    tasks: List[OccTask] = []
    skipped: List[Dict[str, Any]] = []
    for label in wanted:
        mask = labels == label
        n_target, n_other = int(mask.sum()), int((~mask).sum())
        reason = None
        if n_target == 0:
            reason = "label not present"
        elif n_target < min_target_rows:
            reason = f"{n_target} target rows, at least {min_target_rows} needed"
        elif n_other < min_other_rows:
            reason = f"{n_other} other rows, at least {min_other_rows} needed"
        if reason is not None:
            logger.warning(f"Skipping {dataset.dataset_id}/{label}: {reason}")
            skipped.append({"dataset_id": dataset.dataset_id, "target_label": label, "reason": reason})
            continue
        values = dataset.features.values
        tasks.append(OccTask(dataset.dataset_id, label, validate_matrix(values[mask]), validate_matrix(values[~mask])))
    return tasks, skipped


def make_separable_task(
    seed: int,
    n_target: int = 200,
    n_other: int = 200,
    m: int = 2,
    offset: float = 10.0,
) -> OccTask:
    """Targets drawn from N(0, I), others from N(offset, I)."""
    rng = _generator(seed)
    target = rng.standard_normal((n_target, m))
    other = offset + rng.standard_normal((n_other, m))
    return OccTask("separable", "target", validate_matrix(target), validate_matrix(other))


def synthetic_matrix(n: int, m: int, seed: int) -> FeatureMatrix:
    """n standard Gaussian rows in m attributes."""
    return validate_matrix(_generator(seed).standard_normal((n, m)))
