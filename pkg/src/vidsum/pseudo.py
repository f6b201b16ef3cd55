"""Synthetic "pseudo video" instances built from image-caption pairs.

The encoder sequence of length ``L`` is cut into ``n`` random spans, each
span is filled with copies of one image's feature vector, and one random
index per span is designated the keyframe.  Every non-keyframe row gets
additive noise ``v_bar * beta * x`` with ``x ~ N(0, 1)``, where ``v_bar``
is the mean of all feature values of the (noise-free) instance.

Randomness comes from numpy's counter-based Philox generator; instance
``i`` of a run with seed ``s`` uses key ``s ^ i``, so instances can be
generated in any order or in parallel with identical results.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import _iter_jsonl, atomic_write_bytes, atomic_write_text
from .errors import FormatError, ValidationError, VidsumError
from .features import encode_vsft, load_features

logger = logging.getLogger(__name__)

RNG_NAME = "numpy.random.Philox(seed ^ instance_index)"
PER_FRAME = "per_frame"
PER_ELEMENT = "per_element"
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class PseudoConfig:
    n: int
    encoder_len: int
    beta: float = 0.05
    seed: int = 0
    noise: str = PER_FRAME

    def __post_init__(self):
        if self.n < 1 or self.encoder_len < 1:
            raise ValidationError("n and encoder_len must be positive")
        if self.n > self.encoder_len:
            raise ValidationError(f"n={self.n} exceeds encoder_len={self.encoder_len}")
        if self.beta < 0:
            raise ValidationError("beta must be non-negative")
        if self.noise not in (PER_FRAME, PER_ELEMENT):
            raise ValidationError(f"unknown noise mode {self.noise!r}")


@dataclass(frozen=True, eq=False)
class PseudoInstance:
    features: np.ndarray
    keyframe_indices: tuple[int, ...]
    captions: tuple[str, ...]
    span_bounds: tuple[int, ...]
    v_bar: float
    seed: int

    def metadata(self) -> dict:
        return {
            "keyframe_indices": list(self.keyframe_indices),
            "captions": list(self.captions),
            "span_bounds": list(self.span_bounds),
            "v_bar": self.v_bar,
            "seed": self.seed,
        }


def instance_rng(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox((int(seed) ^ int(index)) & _MASK64))


def split_spans(encoder_len: int, n: int, rng: np.random.Generator) -> list[int]:
    """Cut points ``0 = c_0 < ... < c_n = encoder_len`` with uniform interior cuts."""
    if n < 1:
        raise ValidationError("n must be positive")
    if n > encoder_len:
        raise ValidationError(f"cannot cut {encoder_len} slots into {n} non-empty spans")
    interior = rng.choice(encoder_len - 1, size=n - 1, replace=False) + 1
    return [0, *sorted(int(c) for c in interior), encoder_len]


def make_instance(images, captions, cfg: PseudoConfig, rng: np.random.Generator, seed: int | None = None) -> PseudoInstance:
    images = np.asarray(images, dtype=np.float32)
    captions = tuple(str(c) for c in captions)
    if images.ndim != 2 or images.shape[0] != cfg.n:
        raise ValidationError(f"expected {cfg.n} image feature vectors sharing one dimension")
    if len(captions) != cfg.n:
        raise ValidationError(f"expected {cfg.n} captions, got {len(captions)}")

    cuts = split_spans(cfg.encoder_len, cfg.n, rng)
    keys = tuple(int(rng.integers(cuts[j], cuts[j + 1])) for j in range(cfg.n))
    span_of = np.repeat(np.arange(cfg.n), np.diff(cuts))
    clean = images[span_of]
    v_bar = float(clean.astype(np.float64).mean())

    if cfg.noise == PER_FRAME:
        x = rng.standard_normal(cfg.encoder_len)[:, None]
    else:
        x = rng.standard_normal(clean.shape)
    noisy = (clean.astype(np.float64) + v_bar * cfg.beta * x).astype(np.float32)
    noisy[list(keys)] = clean[list(keys)]
    return PseudoInstance(noisy, keys, captions, tuple(cuts), v_bar, cfg.seed if seed is None else seed)


@dataclass(frozen=True)
class SourceItem:
    image_id: str
    feature_file: str
    row: int
    caption: str
    story_id: str | None = None


def load_source(path) -> list[SourceItem]:
    items = []
    for lineno, obj in _iter_jsonl(path):
        try:
            items.append(
                SourceItem(
                    str(obj["image_id"]),
                    str(obj["feature_file"]),
                    int(obj["row"]),
                    str(obj["caption"]),
                    None if obj.get("story_id") is None else str(obj["story_id"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad source record ({exc})") from exc
    return items


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def gen_dataset(source, count: int, cfg: PseudoConfig, out_dir, sampling: str = "coco") -> dict:
    """Write ``count`` instances (``.vsft`` + ``.json``) and ``manifest.json``.

    ``sampling="coco"`` draws ``n`` distinct source items at random per
    instance; ``sampling="story"`` uses the first ``n`` items of the
    instance's story (stories in first-appearance order).

    Returns the manifest dictionary.
    """
    source = Path(source)
    out_dir = Path(out_dir)
    items = load_source(source)
    if sampling not in ("coco", "story"):
        raise ValidationError(f"unknown sampling {sampling!r}")

    stories: list[list[SourceItem]] = []
    if sampling == "story":
        groups: dict[str, list[SourceItem]] = {}
        for it in items:
            if it.story_id is None:
                raise FormatError(f"{source}: story sampling needs story_id on every item")
            groups.setdefault(it.story_id, []).append(it)
        stories = [g for g in groups.values() if len(g) >= cfg.n]
        if count > len(stories):
            raise VidsumError(f"source exhausted: {len(stories)} stories with >= {cfg.n} items, {count} requested")
    elif count > 0 and len(items) < cfg.n:
        raise VidsumError(f"source exhausted: {len(items)} items, need {cfg.n}")

    feature_cache: dict[str, np.ndarray] = {}

    def feature_of(it: SourceItem) -> np.ndarray:
        if it.feature_file not in feature_cache:
            feature_cache[it.feature_file] = load_features(source.parent / it.feature_file).rows
        rows = feature_cache[it.feature_file]
        if not 0 <= it.row < rows.shape[0]:
            raise FormatError(f"{it.image_id}: row {it.row} outside {it.feature_file}")
        return rows[it.row]

    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for i in range(count):
        inst_seed = (cfg.seed ^ i) & _MASK64
        rng = instance_rng(cfg.seed, i)
        if sampling == "coco":
            picked = [items[k] for k in rng.choice(len(items), size=cfg.n, replace=False)]
        else:
            picked = stories[i][: cfg.n]
        inst = make_instance(
            np.stack([feature_of(it) for it in picked]),
            [it.caption for it in picked],
            cfg,
            rng,
            seed=inst_seed,
        )
        stem = f"instance_{i:06d}"
        atomic_write_bytes(out_dir / f"{stem}.vsft", encode_vsft(inst.features))
        meta = inst.metadata()
        meta["image_ids"] = [it.image_id for it in picked]
        atomic_write_text(out_dir / f"{stem}.json", json.dumps(meta, ensure_ascii=False, indent=1) + "\n")
        files.append(stem)

    digests = {"source": _sha256(source)}
    for name in sorted({it.feature_file for it in items}):
        digests[name] = _sha256(source.parent / name)
    manifest = {
        "count": count,
        "config": asdict(cfg),
        "sampling": sampling,
        "rng": RNG_NAME,
        "source_digests": digests,
        "instances": files,
    }
    atomic_write_text(out_dir / "manifest.json", json.dumps(manifest, indent=1) + "\n")
    return manifest
