"""
Removing stray keyframe annotations
===================================

Annotators occasionally mark a frame that does not fit a caption.  Frames
whose features sit far from the caption's centroid are dropped, which
tightens each caption's keyframe set.
"""

import numpy as np

from vidsum import ReferenceSlot, VideoRecord
from vidsum.features import FeatureMatrix
from vidsum.filtering import FilterConfig, filter_dataset, filter_slot

rng = np.random.default_rng(5)
scenes = rng.normal(size=(3, 12))
rows = np.repeat(scenes, 10, axis=0) + 0.2 * rng.normal(size=(30, 12))
fm = FeatureMatrix.from_rows("demo", rows)

# frame 25 belongs to the third scene but was annotated for the first caption
slot = ReferenceSlot("a woman opens a letter", (1, 3, 4, 6, 25))
r = filter_slot(slot, fm)
print("kept", r.kept.keyframes, "removed", sorted(r.removed))
print(f"spread {r.variance_before:.4f} -> {r.variance_after:.4f}")

# k_sigma=0 is aggressive; min_keep guarantees a floor
r = filter_slot(slot, fm, FilterConfig(k_sigma=0.0, min_keep=3))
print("k_sigma=0, min_keep=3:", r.kept.keyframes)

rec = VideoRecord(
    "demo", 15.0, 30,
    # slots are ordered by their first keyframe; frame 2 is a stray mark on the last caption
    (slot, ReferenceSlot("she smiles", (2, 21, 24, 28)), ReferenceSlot("she reads it", (11, 12, 15, 16))),
)
filtered, report = filter_dataset([rec], {"demo": fm})
print([s.keyframes for s in filtered[0].references])
print(report.to_dict()["corpus"])
