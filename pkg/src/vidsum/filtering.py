"""Centroid-distance filtering of annotated keyframes.

For each reference slot the raw features of its annotated keyframes are
averaged into a centroid; keyframes whose distance to the centroid exceeds
``mean(d) + k_sigma * std(d)`` are dropped, keeping at least ``min_keep``
frames (the closest ones).  The spread of a frame set is reported as the
mean squared distance to its centroid divided by the feature dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ReferenceSlot, VideoRecord
from .errors import ValidationError
from .features import FeatureMatrix


@dataclass(frozen=True)
class FilterConfig:
    k_sigma: float = 1.0
    min_keep: int = 1

    def __post_init__(self):
        if not self.k_sigma >= 0:
            raise ValidationError("k_sigma must be non-negative")
        if self.min_keep < 1:
            raise ValidationError("min_keep must be at least 1")


@dataclass(frozen=True)
class SlotFilterResult:
    kept: ReferenceSlot
    removed: frozenset[int]
    variance_before: float
    variance_after: float


def _features(slot: ReferenceSlot, fm: FeatureMatrix) -> np.ndarray:
    idx = list(slot.keyframes)
    if idx[-1] >= fm.num_frames:
        raise ValidationError(f"{fm.video_id}: no features for keyframe {idx[-1]}")
    return fm.rows[idx].astype(np.float64)


def slot_centroid(slot: ReferenceSlot, fm: FeatureMatrix) -> np.ndarray:
    return _features(slot, fm).mean(axis=0)


def spread(vectors: np.ndarray) -> float:
    """Mean squared distance to the centroid, averaged over dimensions."""
    c = vectors.mean(axis=0)
    return float(((vectors - c) ** 2).sum(axis=1).mean() / vectors.shape[1])


def filter_slot(slot: ReferenceSlot, fm: FeatureMatrix, cfg: FilterConfig = FilterConfig()) -> SlotFilterResult:
    X = _features(slot, fm)
    frames = np.asarray(slot.keyframes)
    d = np.linalg.norm(X - X.mean(axis=0), axis=1)
    threshold = d.mean() + cfg.k_sigma * d.std() if math.isfinite(cfg.k_sigma) else math.inf
    keep = d <= threshold
    if keep.sum() < min(cfg.min_keep, len(frames)):
        # closest frames first, ties by frame index
        order = np.lexsort((frames, d))
        keep = np.zeros(len(frames), dtype=bool)
        keep[order[: cfg.min_keep]] = True
    kept = ReferenceSlot(slot.caption, tuple(int(f) for f in frames[keep]))
    removed = frozenset(int(f) for f in frames[~keep])
    return SlotFilterResult(kept, removed, spread(X), spread(X[keep]))


@dataclass
class FilterReport:
    per_video: list[dict] = field(default_factory=list)
    corpus_variance_before: float = 0.0
    corpus_variance_after: float = 0.0
    slots: int = 0
    keyframes_before: int = 0
    keyframes_removed: int = 0

    def to_dict(self) -> dict:
        return {
            "corpus": {
                "variance_before": self.corpus_variance_before,
                "variance_after": self.corpus_variance_after,
                "slots": self.slots,
                "keyframes_before": self.keyframes_before,
                "keyframes_removed": self.keyframes_removed,
            },
            "videos": self.per_video,
        }


def filter_record(rec: VideoRecord, fm: FeatureMatrix, cfg: FilterConfig = FilterConfig()):
    results = [filter_slot(s, fm, cfg) for s in rec.references]
    new = VideoRecord(
        rec.video_id,
        rec.duration_s,
        rec.num_frames,
        tuple(sorted((r.kept for r in results), key=lambda s: (s.first_frame, s.caption))),
    )
    return new, results


def filter_dataset(records, features, cfg: FilterConfig = FilterConfig()):
    """Filter every slot of every record.

    ``features`` maps video id to :class:`FeatureMatrix`.  Corpus variances
    are unweighted means over slots.
    """
    report = FilterReport()
    out = []
    before_all, after_all = [], []
    for rec in records:
        fm = features[rec.video_id]
        new, results = filter_record(rec, fm, cfg)
        out.append(new)
        vb = [r.variance_before for r in results]
        va = [r.variance_after for r in results]
        before_all += vb
        after_all += va
        n_before = sum(len(s.keyframes) for s in rec.references)
        n_removed = sum(len(r.removed) for r in results)
        report.keyframes_before += n_before
        report.keyframes_removed += n_removed
        report.per_video.append(
            {
                "video_id": rec.video_id,
                "variance_before": math.fsum(vb) / len(vb),
                "variance_after": math.fsum(va) / len(va),
                "removed": n_removed,
                "slots": [
                    {
                        "variance_before": r.variance_before,
                        "variance_after": r.variance_after,
                        "removed": sorted(r.removed),
                    }
                    for r in results
                ],
            }
        )
    report.slots = len(before_all)
    if before_all:
        report.corpus_variance_before = math.fsum(before_all) / len(before_all)
        report.corpus_variance_after = math.fsum(after_all) / len(after_all)
    return out, report
