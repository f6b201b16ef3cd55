"""Shared data model and the JSON/JSONL file formats.

Time is discretised on a fixed 0.5 s grid; a keyframe is identified by its
integer index on that grid.  All record types are frozen dataclasses so they
can be shared freely between worker threads.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import FormatError, ValidationError

logger = logging.getLogger(__name__)

FRAME_SECONDS = 0.5


def seconds_to_frame(t: float) -> int:
    """Map a timestamp in seconds onto the frame grid (round half up)."""
    if t < 0:
        raise ValueError(f"negative timestamp {t}")
    return int(math.floor(t / FRAME_SECONDS + 0.5))


def frame_to_seconds(index: int) -> float:
    return index * FRAME_SECONDS


@dataclass(frozen=True)
class ReferenceSlot:
    """One reference caption together with its candidate keyframes.

    ``keyframes`` is normalised to a sorted, duplicate-free tuple.
    """

    caption: str
    keyframes: tuple[int, ...]

    def __post_init__(self):
        kf = tuple(sorted({int(k) for k in self.keyframes}))
        if not kf:
            raise ValidationError("reference slot has no keyframes")
        if kf[0] < 0:
            raise ValidationError(f"negative keyframe index {kf[0]}")
        object.__setattr__(self, "keyframes", kf)

    @property
    def first_frame(self) -> int:
        return self.keyframes[0]

    def __contains__(self, frame: int) -> bool:
        return frame in set(self.keyframes)


def _slot_order_key(slot: ReferenceSlot):
    return (slot.first_frame, slot.caption)


@dataclass(frozen=True)
class VideoRecord:
    """A video with its duration, frame count and ordered reference slots."""

    video_id: str
    duration_s: float
    num_frames: int
    references: tuple[ReferenceSlot, ...]

    def __post_init__(self):
        object.__setattr__(self, "references", tuple(self.references))
        vid = self.video_id
        if not (self.duration_s > 0 and math.isfinite(self.duration_s)):
            raise ValidationError(f"{vid}: duration_s must be positive, got {self.duration_s}")
        if self.num_frames < 1:
            raise ValidationError(f"{vid}: num_frames must be positive")
        expected = math.floor(self.duration_s / FRAME_SECONDS)
        if abs(self.num_frames - expected) > 1:
            raise ValidationError(
                f"{vid}: num_frames={self.num_frames} inconsistent with "
                f"duration {self.duration_s}s (expected {expected} +/- 1)"
            )
        if not self.references:
            raise ValidationError(f"{vid}: at least one reference slot is required")
        for j, slot in enumerate(self.references):
            if slot.keyframes[-1] >= self.num_frames:
                raise ValidationError(
                    f"{vid}: slot {j} keyframe {slot.keyframes[-1]} outside [0, {self.num_frames})"
                )
        keys = [_slot_order_key(s) for s in self.references]
        if keys != sorted(keys):
            raise ValidationError(f"{vid}: reference slots are not in chronological order")

    @property
    def M(self) -> int:
        return len(self.references)


@dataclass(frozen=True)
class PredictedSummary:
    """An ordered list of ``(frame, caption)`` pairs produced by a system."""

    video_id: str
    pairs: tuple[tuple[int, str], ...]

    def __post_init__(self):
        pairs = tuple((int(f), str(c)) for f, c in self.pairs)
        if not pairs:
            raise ValidationError(f"{self.video_id}: empty prediction")
        frames = [f for f, _ in pairs]
        if frames[0] < 0:
            raise ValidationError(f"{self.video_id}: negative frame index")
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValidationError(f"{self.video_id}: predicted frames must be strictly increasing")
        object.__setattr__(self, "pairs", pairs)

    @property
    def N(self) -> int:
        return len(self.pairs)

    @property
    def frames(self) -> list[int]:
        return [f for f, _ in self.pairs]

    @property
    def captions(self) -> list[str]:
        return [c for _, c in self.pairs]


@dataclass(frozen=True)
class Candidate:
    """A scored (segment, keyframe, caption) tuple.

    Segment bounds are optional so that the same record type can carry
    plain frame/caption candidates for beam search.
    """

    video_id: str
    keyframe: int
    caption: str
    segment_start_s: float | None = None
    segment_end_s: float | None = None
    segment_score: float = 0.0
    caption_score: float = 0.0

    def __post_init__(self):
        if self.keyframe < 0:
            raise ValidationError(f"{self.video_id}: negative keyframe {self.keyframe}")
        if (self.segment_start_s is None) != (self.segment_end_s is None):
            raise ValidationError(f"{self.video_id}: segment needs both bounds")
        if self.has_segment:
            s, e = self.segment_start_s, self.segment_end_s
            if not s < e:
                raise ValidationError(f"{self.video_id}: empty segment [{s}, {e})")
            t = frame_to_seconds(self.keyframe)
            if not s <= t < e:
                raise ValidationError(
                    f"{self.video_id}: keyframe {self.keyframe} ({t}s) outside segment [{s}, {e})"
                )

    @property
    def has_segment(self) -> bool:
        return self.segment_start_s is not None

    @property
    def length_s(self) -> float:
        return self.segment_end_s - self.segment_start_s


# ---------------------------------------------------------------------------
# Dataset JSON
# ---------------------------------------------------------------------------


def _read_json(path) -> object:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _iter_jsonl(path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            if not isinstance(obj, dict):
                raise FormatError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def record_from_dict(d: dict) -> VideoRecord:
    try:
        vid = str(d["video_id"])
        slots = [ReferenceSlot(str(r["caption"]), tuple(r["keyframes"])) for r in d["references"]]
        duration = float(d["duration_s"])
        num_frames = int(d["num_frames"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed video entry: missing or bad field {exc}") from exc
    except ValidationError as exc:
        raise ValidationError(f"{d.get('video_id')}: {exc}") from exc
    ordered = sorted(slots, key=_slot_order_key)
    if ordered != slots:
        logger.warning("%s: reference slots re-sorted into chronological order", vid)
    return VideoRecord(vid, duration, num_frames, tuple(ordered))


def record_to_dict(rec: VideoRecord) -> dict:
    return {
        "video_id": rec.video_id,
        "duration_s": rec.duration_s,
        "num_frames": rec.num_frames,
        "references": [
            {"caption": s.caption, "keyframes": list(s.keyframes)} for s in rec.references
        ],
    }


def load_dataset(path) -> list[VideoRecord]:
    """Read a dataset JSON file and validate every record.

    Raises:
        FormatError: the file is not valid JSON or lacks required fields.
        ValidationError: a record violates an invariant; the message starts
            with the offending ``video_id``.
    """
    data = _read_json(path)
    if not isinstance(data, dict) or not isinstance(data.get("videos"), list):
        raise FormatError(f"{path}: expected an object with a 'videos' list")
    return [record_from_dict(v) for v in data["videos"]]


def dumps_dataset(records: Iterable[VideoRecord]) -> str:
    return json.dumps({"videos": [record_to_dict(r) for r in records]}, ensure_ascii=False, indent=1) + "\n"


def save_dataset(records: Iterable[VideoRecord], path) -> None:
    atomic_write_text(path, dumps_dataset(records))


# ---------------------------------------------------------------------------
# JSONL formats
# ---------------------------------------------------------------------------


def load_predictions(path) -> list[PredictedSummary]:
    out = []
    for lineno, obj in _iter_jsonl(path):
        try:
            pairs = tuple((int(p["frame"]), str(p["caption"])) for p in obj["pairs"])
            out.append(PredictedSummary(str(obj["video_id"]), pairs))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}:{lineno}: bad prediction record ({exc})") from exc
    return out


def prediction_to_dict(pred: PredictedSummary) -> dict:
    return {
        "video_id": pred.video_id,
        "pairs": [{"frame": f, "caption": c} for f, c in pred.pairs],
    }


def dumps_jsonl(objs: Iterable[dict]) -> str:
    return "".join(json.dumps(o, ensure_ascii=False) + "\n" for o in objs)


def save_predictions(preds: Iterable[PredictedSummary], path) -> None:
    atomic_write_text(path, dumps_jsonl(prediction_to_dict(p) for p in preds))


def candidate_from_dict(obj: dict) -> Candidate:
    seg = obj.get("segment")
    start = end = None
    if seg is not None:
        if len(seg) != 2:
            raise FormatError("segment must be [start_s, end_s]")
        start, end = float(seg[0]), float(seg[1])
    return Candidate(
        video_id=str(obj["video_id"]),
        keyframe=int(obj["keyframe"]),
        caption=str(obj["caption"]),
        segment_start_s=start,
        segment_end_s=end,
        segment_score=float(obj.get("segment_score", 0.0)),
        caption_score=float(obj.get("caption_score", 0.0)),
    )


def candidate_to_dict(c: Candidate) -> dict:
    d = {"video_id": c.video_id}
    if c.has_segment:
        d["segment"] = [c.segment_start_s, c.segment_end_s]
    d.update(
        segment_score=c.segment_score,
        keyframe=c.keyframe,
        caption=c.caption,
        caption_score=c.caption_score,
    )
    return d


def load_candidates(path) -> dict[str, list[Candidate]]:
    """Read Candidate JSONL, grouped by video id in file order."""
    groups: dict[str, list[Candidate]] = {}
    for lineno, obj in _iter_jsonl(path):
        try:
            c = candidate_from_dict(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad candidate record ({exc})") from exc
        groups.setdefault(c.video_id, []).append(c)
    return groups


def atomic_write_bytes(path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def check_prediction_fits(pred: PredictedSummary, rec: VideoRecord) -> None:
    if pred.N > rec.M:
        raise ValidationError(
            f"{rec.video_id}: prediction longer than references (N={pred.N} > M={rec.M})"
        )
    bad = [f for f in pred.frames if f >= rec.num_frames]
    if bad:
        raise ValidationError(f"{rec.video_id}: predicted frame {bad[0]} outside the video")


__all__ = [
    "FRAME_SECONDS",
    "Candidate",
    "PredictedSummary",
    "ReferenceSlot",
    "VideoRecord",
    "atomic_write_bytes",
    "atomic_write_text",
    "candidate_from_dict",
    "candidate_to_dict",
    "check_prediction_fits",
    "dumps_dataset",
    "dumps_jsonl",
    "frame_to_seconds",
    "load_candidates",
    "load_dataset",
    "load_predictions",
    "prediction_to_dict",
    "record_from_dict",
    "record_to_dict",
    "save_dataset",
    "save_predictions",
    "seconds_to_frame",
]
