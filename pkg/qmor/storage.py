"""
Artifact storage helpers

JSON manifests, little-endian float64 blobs and full-precision CSV tables.
Every persisted object of the workbench goes through these functions.
"""

import csv
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from qmor.errors import ArtifactError

FORMAT_VERSION = 1
BLOB_DTYPE = "<f8"


def utc_now() -> str:
    return datetime.utcnow().isoformat()


def write_manifest(directory: Path, kind: str, payload: Dict[str, Any], name: str = "manifest.json") -> Path:
    """Write a JSON manifest with the common header fields"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "kind": kind,
        "format_version": FORMAT_VERSION,
        "created_at": utc_now(),
        **payload,
    }
    path = directory / name
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2)
    return path


def read_manifest(directory: Path, kind: Optional[str] = None, name: str = "manifest.json") -> Dict[str, Any]:
    path = Path(directory) / name
    if not path.exists():
        raise ArtifactError(f"Missing manifest: {path}")
    try:
        with open(path, "r") as f:
            manifest = json.load(f)
    except json.JSONDecodeError as e:
        raise ArtifactError(f"Corrupt manifest {path}: {e}")
    if kind is not None and manifest.get("kind") != kind:
        raise ArtifactError(f"{path} holds '{manifest.get('kind')}', expected '{kind}'")
    return manifest


def write_blob(path: Path, array: np.ndarray) -> None:
    """Write a real or complex array as little-endian float64 (complex interleaved)"""
    array = np.ascontiguousarray(array)
    if np.iscomplexobj(array):
        array = array.astype(np.complex128).view(np.float64)
    array.astype(BLOB_DTYPE).tofile(path)


def read_blob(path: Path, shape: Sequence[int], complex_values: bool = False) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"Missing blob: {path}")
    raw = np.fromfile(path, dtype=BLOB_DTYPE).astype(np.float64)
    expected = int(np.prod(shape)) * (2 if complex_values else 1)
    if raw.size != expected:
        raise ArtifactError(f"{path}: expected {expected} float64 values, found {raw.size}")
    if complex_values:
        return raw.view(np.complex128).reshape(tuple(shape))
    return raw.reshape(tuple(shape))


def fmt(value: Any) -> str:
    """Full 17-significant-digit text for floats, plain text otherwise"""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path: Path) -> List[Dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"Missing table: {path}")
    with open(path, "r", newline="") as f:
        return list(csv.DictReader(f))


def mu_dirname(mu: Sequence[float]) -> str:
    """Directory name for a parameter: shortest round-tripping text of each value"""
    eps, alpha = mu
    return f"{float(eps)!r}_{float(alpha)!r}"
