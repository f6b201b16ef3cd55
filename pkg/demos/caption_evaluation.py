"""
Evaluating captions along the keyframe alignment
================================================

The cosine alignment decides which reference caption each predicted
caption is compared with.  Caption quality is then measured with an
exact-match METEOR.
"""

import numpy as np

from vidsum import PredictedSummary, ReferenceSlot, VideoRecord
from vidsum.caption_eval import aggregate, evaluate_summary, meteor_exact_detail
from vidsum.features import FeatureMatrix

# the METEOR variant only counts exact unigram matches
for cand, ref in [("dog", "dog"), ("a b c", "a b c"), ("the cat sat on the mat", "on the mat the cat sat")]:
    r = meteor_exact_detail(cand, ref)
    print(f"{cand!r:28} vs {ref!r:28} matches={r.matches} chunks={r.chunks} score={r.score:.4f}")

rng = np.random.default_rng(3)
refs = VideoRecord(
    "demo",
    15.0,
    30,
    (
        ReferenceSlot("a boy kicks a ball", (2, 3)),
        ReferenceSlot("the ball rolls into the street", (11,)),
        ReferenceSlot("a car stops suddenly", (18, 19)),
        ReferenceSlot("the boy waves at the driver", (27,)),
    ),
)
fm_rows = np.repeat(rng.normal(size=(4, 8)), [8, 8, 8, 6], axis=0) + 0.1 * rng.normal(size=(30, 8))
fm = FeatureMatrix.from_rows("demo", fm_rows)
pred = PredictedSummary("demo", ((3, "a boy kicks a ball"), (12, "a ball rolls away"), (26, "the boy waves")))

report = evaluate_summary(pred, refs, fm)
for k, v in report.metrics().items():
    print(f"{k:16} {v:.4f}")
print("reference captions used:", [refs.references[j].caption for j in report.assign])

corpus = aggregate([report])
print(corpus.to_dict())
