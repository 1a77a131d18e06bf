"""
Utility functions: logging setup, data fingerprints and file I/O.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .exceptions import DataFileError, ValidationError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

PathLike = Union[str, Path]


def configure_logging(level: str = "WARNING") -> None:
    """
    Install the root log handler.

    Args:
        level: Level name such as "INFO" or "DEBUG".
    """
    logging.basicConfig(level=getattr(logging, level.upper(), logging.WARNING), format=LOG_FORMAT, force=True)


def fingerprint(values: np.ndarray) -> Dict[str, Any]:
    """
    Identify a data table: its row and column counts and a SHA-256 of its
    little-endian float64 bytes.

    Args:
        values: A 2-D array.

    Returns:
        A dictionary with keys rows, columns and sha256.
    """
    values = np.ascontiguousarray(values, dtype="<f8")
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    rows, columns = values.shape
    return {
        "rows": int(rows),
        "columns": int(columns),
        "sha256": hashlib.sha256(values.tobytes()).hexdigest(),
    }


def _read_frame(path: PathLike) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataFileError(f"File not found: {path}")
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataFileError(f"{path} is empty; a header row is required.") from None
    except (pd.errors.ParserError, UnicodeDecodeError, OSError) as e:
        raise DataFileError(f"Cannot parse {path}: {e}") from e


def _parse_cell(cell: str) -> float:
    try:
        return float(cell)
    except (TypeError, ValueError):
        return float("nan")


def _to_numeric(frame: pd.DataFrame, path: PathLike) -> np.ndarray:
    """Convert every cell to float, rejecting missing, non-numeric and non-finite values."""
    numeric = np.vectorize(_parse_cell, otypes=[np.float64])(frame.to_numpy(dtype=object))
    numeric = numeric.reshape(frame.shape)
    bad = ~np.isfinite(numeric)
    if bad.any():
        row, column = (int(i) for i in np.argwhere(bad)[0])
        cell = frame.iat[row, column]
        raise ValidationError(
            f"{path}: row {row}, column '{frame.columns[column]}' holds {cell!r}; "
            "every attribute value must be a finite number.",
            row=row,
            column=column,
        )
    return numeric


def read_table(path: PathLike) -> Tuple[np.ndarray, List[str]]:
    """
    Read an unlabelled numeric CSV file with a header row.

    Args:
        path: The file path.

    Returns:
        A tuple of (values as a (rows, columns) array, column names). The array may
        have zero rows.
    """
    frame = _read_frame(path)
    if frame.shape[1] == 0:
        raise DataFileError(f"{path} has no columns.")
    return _to_numeric(frame, path), [str(c) for c in frame.columns]


def read_labelled_table(path: PathLike) -> Tuple[np.ndarray, List[str], List[str]]:
    """
    Read a labelled CSV file: numeric attributes followed by a final class-label column.

    Returns:
        A tuple of (attribute values, labels, attribute names).
    """
    frame = _read_frame(path)
    if frame.shape[1] < 2:
        raise DataFileError(f"{path} needs at least one attribute column and a label column.")
    labels = [str(label).strip() for label in frame.iloc[:, -1]]
    attributes = frame.iloc[:, :-1]
    return _to_numeric(attributes, path), labels, [str(c) for c in attributes.columns]


def format_scores(scores: Sequence[float]) -> str:
    """Scores as CSV text: header `score`, one value per line with 17 significant digits."""
    frame = pd.DataFrame({"score": np.asarray(scores, dtype=np.float64)})
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")


def write_text(path: Optional[PathLike], text: str) -> Optional[Path]:
    """
    Write text to a file; without a path nothing is written.

    Args:
        path: Destination, or None.
        text: The content.

    Returns:
        The path written, if any.
    """
    if path is None:
        return None
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise DataFileError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote {path}")
    return path


def to_json(data: Dict[str, Any]) -> str:
    """Stable JSON text: sorted keys, two-space indent."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def save_json(path: PathLike, data: Dict[str, Any]) -> Path:
    """Save a report dictionary as stable JSON."""
    return write_text(path, to_json(data))


def load_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise DataFileError(f"File not found: {path}")
    try:
        with open(path, "r") as f:
            return json.load(f)
    except (json.JSONDecodeError, OSError) as e:
        raise DataFileError(f"Cannot read {path}: {e}") from e
