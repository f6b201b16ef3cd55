"""Per-frame feature matrices and the VSFT binary container.

VSFT layout (all little-endian)::

    b"VSFT" | u32 version (=1) | u32 num_frames | u32 dim | f32[num_frames * dim]

Rows are stored row-major.  A directory of VSFT files is addressed either
through a JSON sidecar (``{"video_id": "file.vsft", ...}``) or by the
``<video_id>.vsft`` naming convention.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import atomic_write_bytes
from .errors import FormatError, ValidationError

MAGIC = b"VSFT"
VERSION = 1
_HEADER = struct.Struct("<4sIII")
SIDECAR_NAME = "features.json"


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Image features of every frame of one video.

    Attributes:
        video_id: owning video.
        rows: ``(num_frames, dim)`` array, row ``i`` is the feature of frame ``i``.
        mean: float64 mean over *all* rows of the video.
    """

    video_id: str
    rows: np.ndarray
    mean: np.ndarray

    @classmethod
    def from_rows(cls, video_id: str, rows) -> "FeatureMatrix":
        rows = np.array(rows, copy=True)
        if rows.dtype.kind != "f":
            rows = rows.astype(np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ValidationError(f"{video_id}: feature rows must be a non-empty 2-d array")
        if not np.all(np.isfinite(rows)):
            raise ValidationError(f"{video_id}: NaN or Inf in feature matrix")
        rows.setflags(write=False)
        mean = rows.astype(np.float64).mean(axis=0)
        mean.setflags(write=False)
        return cls(video_id, rows, mean)

    @property
    def num_frames(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < self.num_frames:
            raise IndexError(f"{self.video_id}: frame {i} outside [0, {self.num_frames})")
        return self.rows[i].astype(np.float64)


def mean_center(fm: FeatureMatrix, i: int) -> np.ndarray:
    """Return ``rows[i] - mean`` in float64."""
    return fm.row(i) - fm.mean


def centered_rows(fm: FeatureMatrix, frames) -> np.ndarray:
    """Vectorised :func:`mean_center` for several frames at once."""
    idx = np.asarray(list(frames), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= fm.num_frames):
        raise IndexError(f"{fm.video_id}: frame index outside [0, {fm.num_frames})")
    return fm.rows[idx].astype(np.float64) - fm.mean


def encode_vsft(rows) -> bytes:
    rows = np.asarray(rows)
    if rows.ndim != 2:
        raise ValueError("feature rows must be 2-d")
    n, d = rows.shape
    payload = np.ascontiguousarray(rows, dtype="<f4").tobytes()
    return _HEADER.pack(MAGIC, VERSION, n, d) + payload


def decode_vsft(data: bytes, video_id: str = "") -> FeatureMatrix:
    if len(data) < _HEADER.size:
        raise FormatError(f"{video_id}: truncated VSFT header")
    magic, version, n, d = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{video_id}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{video_id}: unsupported VSFT version {version}")
    expected = _HEADER.size + 4 * n * d
    if len(data) != expected:
        raise FormatError(f"{video_id}: payload is {len(data)} bytes, expected {expected}")
    rows = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(n, d).astype(np.float32)
    if np.isnan(rows).any():
        raise FormatError(f"{video_id}: NaN detected in payload")
    return FeatureMatrix.from_rows(video_id, rows)


def load_features(path, video_id: str | None = None) -> FeatureMatrix:
    path = Path(path)
    return decode_vsft(path.read_bytes(), video_id if video_id is not None else path.stem)


def save_features(fm_or_rows, path) -> None:
    rows = fm_or_rows.rows if isinstance(fm_or_rows, FeatureMatrix) else fm_or_rows
    atomic_write_bytes(path, encode_vsft(rows))


class FeatureStore:
    """Lazy, caching lookup of feature matrices by video id.

    ``location`` is either a sidecar JSON file or a directory; a directory
    containing ``features.json`` uses that sidecar, otherwise files are
    resolved as ``<dir>/<video_id>.vsft``.
    """

    def __init__(self, location):
        location = Path(location)
        self._mapping: dict[str, Path] | None = None
        if location.is_file():
            self._base = location.parent
            self._mapping = self._read_sidecar(location)
        else:
            self._base = location
            sidecar = location / SIDECAR_NAME
            if sidecar.is_file():
                self._mapping = self._read_sidecar(sidecar)
        self._cache: dict[str, FeatureMatrix] = {}

    def _read_sidecar(self, path: Path) -> dict[str, Path]:
        try:
            mapping = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        if not isinstance(mapping, dict):
            raise FormatError(f"{path}: sidecar must map video_id to file name")
        return {str(k): self._base / str(v) for k, v in mapping.items()}

    def path_for(self, video_id: str) -> Path:
        if self._mapping is not None:
            if video_id not in self._mapping:
                raise KeyError(f"no features listed for video {video_id!r}")
            return self._mapping[video_id]
        return self._base / f"{video_id}.vsft"

    def __contains__(self, video_id: str) -> bool:
        try:
            return self.path_for(video_id).is_file()
        except KeyError:
            return False

    def __getitem__(self, video_id: str) -> FeatureMatrix:
        fm = self._cache.get(video_id)
        if fm is None:
            path = self.path_for(video_id)
            if not path.is_file():
                raise KeyError(f"no feature file for video {video_id!r} at {path}")
            fm = load_features(path, video_id)
            self._cache[video_id] = fm
        return fm


def save_feature_dir(matrices, directory) -> None:
    """Write ``<video_id>.vsft`` files plus a sidecar into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    mapping = {}
    for fm in matrices:
        name = f"{fm.video_id}.vsft"
        save_features(fm, directory / name)
        mapping[fm.video_id] = name
    (directory / SIDECAR_NAME).write_text(json.dumps(mapping, indent=1, sort_keys=True) + "\n")
