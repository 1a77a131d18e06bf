"""
Versioned binary container for fitted data descriptions.

Layout: the magic bytes, a little-endian uint16 format version, a little-endian uint32
header length, a UTF-8 JSON header with sorted keys, then the array payload. The
header's `arrays` manifest gives each array's dtype, shape and byte offset into the
payload; arrays are stored as little-endian float64 or int64.
"""
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from . import __version__
from .descriptors import DESCRIPTIONS, DescriptorKind
from .exceptions import DataFileError
from .models import DataDescription, State
from .preprocessing import IqrScaler
from .reports import RNG_NAME

logger = logging.getLogger(__name__)

MAGIC = b"OCCKIT\0\0"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<HI")


@dataclass(frozen=True, eq=False)
class LoadedModel:
    """A data description together with the scaler and metadata it was saved with."""
    description: DataDescription
    scaler: IqrScaler
    header: Dict[str, Any]

    @property
    def kind(self) -> str:
        return self.header["kind"]


def _split_state(state: State) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    scalars: Dict[str, Any] = {}
    arrays: Dict[str, np.ndarray] = {}
    for name, value in state.items():
        if isinstance(value, np.ndarray):
            dtype = "<i8" if np.issubdtype(value.dtype, np.integer) or value.dtype == bool else "<f8"
            arrays[name] = np.ascontiguousarray(value, dtype=dtype)
        elif isinstance(value, np.generic):
            scalars[name] = value.item()
        else:
            scalars[name] = value
    return scalars, arrays


def encode_model(
    description: DataDescription,
    scaler: IqrScaler,
    metadata: Optional[Dict[str, Any]] = None,
) -> bytes:
    """
    Serialise a description and its scaler.

    Args:
        description: The fitted description.
        scaler: The IQR scaler applied to training data before fitting.
        metadata: Extra header entries such as seed, metric and data fingerprint.

    Returns:
        The container bytes.
    """
    scalars, arrays = _split_state(description.get_state())
    manifest = []
    offset = 0
    for name in sorted(arrays):
        array = arrays[name]
        manifest.append({"name": name, "dtype": array.dtype.str, "shape": list(array.shape), "offset": offset})
        offset += array.nbytes

    header = {
        **(metadata or {}),
        "kind": description.kind,
        "hyperparameters": description.hyperparameters(),
        "version": __version__,
        "rng": RNG_NAME,
        "scaler": scaler.to_dict(),
        "state": scalars,
        "arrays": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(arrays[entry["name"]].tobytes() for entry in manifest)
    return MAGIC + _PREAMBLE.pack(FORMAT_VERSION, len(header_bytes)) + header_bytes + payload


def decode_model(data: bytes, source: str = "<bytes>") -> LoadedModel:
    """
    Rebuild a description from container bytes.

    Raises:
        DataFileError: On a wrong magic string, a newer format version or a truncated
            or corrupt file.
    """
    if not data.startswith(MAGIC):
        raise DataFileError(f"{source} is not an occkit model file.")
    start = len(MAGIC)
    if len(data) < start + _PREAMBLE.size:
        raise DataFileError(f"{source} is truncated.")
    version, header_length = _PREAMBLE.unpack_from(data, start)
    if version > FORMAT_VERSION:
        raise DataFileError(
            f"{source} uses model format version {version}; this build reads up to {FORMAT_VERSION}."
        )
    body = start + _PREAMBLE.size
    try:
        header = json.loads(data[body:body + header_length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataFileError(f"{source} has a corrupt header: {e}") from e

    payload = memoryview(data)[body + header_length:]
    state: State = dict(header.get("state", {}))
    for entry in header.get("arrays", []):
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = entry["offset"] + count * dtype.itemsize
        if end > len(payload):
            raise DataFileError(f"{source} is truncated (array '{entry['name']}').")
        state[entry["name"]] = np.frombuffer(payload[entry["offset"]:end], dtype=dtype).reshape(shape).copy()

    try:
        kind = DescriptorKind(header["kind"])
        description = DESCRIPTIONS[kind].from_state(state)
        scaler = IqrScaler.from_dict(header["scaler"])
    except (KeyError, ValueError) as e:
        raise DataFileError(f"{source} has an incomplete model state: {e}") from e
    return LoadedModel(description=description, scaler=scaler, header=header)


def save_model(
    path: Union[str, Path],
    description: DataDescription,
    scaler: IqrScaler,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_model(description, scaler, metadata))
    except OSError as e:
        raise DataFileError(f"Cannot write {path}: {e}") from e
    logger.info(f"Saved {description.kind} model to {path}")
    return path


def load_model(path: Union[str, Path]) -> LoadedModel:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise DataFileError(f"Model file not found: {path}") from None
    except OSError as e:
        raise DataFileError(f"Cannot read {path}: {e}") from e
    return decode_model(data, str(path))
