"""
Beam search over frames and captions
====================================

At every round each partial summary is extended by one later frame and one
of that frame's candidate captions.  Frame and caption log-likelihoods are
min-max normalised over the expansions and mixed with weight alpha.
"""

from vidsum.beam import BeamConfig, beam_select, count_paths, exhaustive_select, hash_scorer

choices = {
    1: ["a bird lands", "a bird on a branch"],
    4: ["the bird sings"],
    6: ["another bird arrives", "two birds sit together"],
    9: ["the birds fly off"],
    12: ["an empty branch"],
}

# a deterministic stand-in scorer: values depend on the prefix, frame and caption
scorer = hash_scorer(seed=7)
print("complete paths of length 3:", count_paths(choices, 3))

for width in (1, 2, 4, 8, 32):
    pred, score = beam_select(choices, scorer, BeamConfig(n=3, width=width))
    print(f"W={width:<3} score={score:.4f}", [f for f in pred.frames])

best, best_score = exhaustive_select(choices, scorer, BeamConfig(n=3))
print("exhaustive   score=%.4f" % best_score, best.pairs)

# alpha trades frame likelihood against caption likelihood
for alpha in (0.0, 0.5, 1.0):
    pred, _ = beam_select(choices, scorer, BeamConfig(n=2, alpha=alpha))
    print(f"alpha={alpha}:", pred.pairs)
