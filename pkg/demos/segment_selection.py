"""
Choosing N segments by dynamic programming
==========================================

Each candidate is a scored segment with a keyframe and a caption.  The
hard mode picks exactly N pairwise disjoint segments with the largest
total score; the soft mode allows overlap at a per-second cost.
"""

from vidsum import Candidate
from vidsum.selector import SelectorConfig, prefilter, select_bruteforce, select_n_dp, select_summary

raw = [
    # video, keyframe, caption, start, end, segment score, caption score
    Candidate("demo", 2, "people gather outside", 0.0, 4.0, 0.6, 0.7),
    Candidate("demo", 7, "a speech begins", 3.0, 6.0, 0.9, 0.4),
    Candidate("demo", 13, "the crowd applauds", 6.0, 9.0, 0.5, 0.8),
    Candidate("demo", 16, "balloons are released", 8.0, 11.0, 0.7, 0.9),
    Candidate("demo", 22, "people leave", 11.0, 14.0, 0.3, 0.5),
    Candidate("demo", 1, "the whole event", 0.0, 14.0, 1.0, 1.0),
]

# segments covering more than three quarters of the video are dropped first
cands = prefilter(raw, duration_s=14.0, cfg=SelectorConfig(n=3))
print("after prefilter:", [c.caption for c in cands])

hard = select_n_dp(cands, SelectorConfig(n=3))
print("hard :", [c.caption for c in hard.candidates], round(hard.objective, 3))

soft = select_n_dp(cands, SelectorConfig(n=3, mode="soft", overlap_penalty_per_s=0.1))
print("soft :", [c.caption for c in soft.candidates], round(soft.objective, 3))

# both agree with exhaustive enumeration
assert hard.objective == select_bruteforce(cands, SelectorConfig(n=3)).objective
assert soft.objective == select_bruteforce(cands, SelectorConfig(n=3, mode="soft", overlap_penalty_per_s=0.1)).objective

# asking for five disjoint segments is impossible here, so the selector
# falls back to the soft objective and says so
five = select_summary(raw, 14.0, SelectorConfig(n=5))
print("n=5  :", five.mode, "fell back:", five.fell_back)
print(five.to_prediction())
