"""
Scoring a summary with aligned keyframe matching
================================================

A reference video carries several captions, each with a handful of
acceptable keyframes.  A predicted summary is scored by the best
order-preserving assignment of its frames to those captions.
"""

import numpy as np

from vidsum import PredictedSummary, ReferenceSlot, VideoRecord
from vidsum.akm import akm_align, akm_bruteforce, akm_score_matrix
from vidsum.features import FeatureMatrix

# four reference captions on a 40-frame (20 s) video
refs = VideoRecord(
    "demo",
    20.0,
    40,
    (
        ReferenceSlot("a chef slices onions", (3, 4, 5)),
        ReferenceSlot("onions go into a hot pan", (12, 13)),
        ReferenceSlot("the chef stirs the sauce", (20, 22, 25)),
        ReferenceSlot("the dish is plated", (36,)),
    ),
)

# three predicted frames; the middle one falls between annotated frames
pred = PredictedSummary("demo", ((4, "someone cuts onions"), (17, "a pan heats up"), (36, "food on a plate")))

S = akm_score_matrix(pred, refs, "exact")
print("exact match matrix (rows: predictions, cols: reference captions)")
print(S.s.astype(int))
al = akm_align(S)
print("assignment:", al.assign, "AKM_ex =", round(al.score, 4))

# the dynamic programme agrees with enumerating every increasing assignment
print("brute force:", round(akm_bruteforce(S), 4))

# With features, near misses earn partial credit through cosine similarity
# of mean-centred frame vectors.  Here the features drift slowly over time.
rng = np.random.default_rng(0)
walk = np.cumsum(rng.normal(size=(40, 16)), axis=0)
fm = FeatureMatrix.from_rows("demo", walk)
S_cos = akm_score_matrix(pred, refs, "cosine", fm)
np.set_printoptions(precision=3, suppress=True)
print("cosine match matrix")
print(S_cos.s)
al_cos = akm_align(S_cos)
print("assignment:", al_cos.assign, "AKM_cos =", round(al_cos.score, 4))
