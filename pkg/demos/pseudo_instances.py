"""
Synthetic training instances from still images
===============================================

A fixed-length feature sequence is cut into N spans, each filled with one
image's features.  One row per span is kept clean as the keyframe and all
other rows receive Gaussian noise scaled by the instance's mean feature value.
"""

import numpy as np

from vidsum.pseudo import PseudoConfig, instance_rng, make_instance, split_spans

cfg = PseudoConfig(n=4, encoder_len=24, beta=0.05, seed=2024)
images = np.random.default_rng(1).normal(loc=1.0, size=(4, 6)).astype(np.float32)
captions = ["a kite in the sky", "children run on grass", "a dog chases them", "everyone sits down"]

print("span cuts:", split_spans(24, 4, instance_rng(cfg.seed, 0)))

inst = make_instance(images, captions, cfg, instance_rng(cfg.seed, 0))
print("span bounds:", inst.span_bounds)
print("keyframes:  ", inst.keyframe_indices)
print("v_bar:      ", round(inst.v_bar, 4))

# keyframe rows reproduce the source images bit for bit
for j, k in enumerate(inst.keyframe_indices):
    assert inst.features[k].tobytes() == images[j].tobytes()

# the same seed and index always give the same instance
again = make_instance(images, captions, cfg, instance_rng(cfg.seed, 0))
print("reproducible:", again.features.tobytes() == inst.features.tobytes())

# deviation of a noised row relative to v_bar has standard deviation beta
devs = []
for i in range(2000):
    x = make_instance(images, captions, cfg, instance_rng(cfg.seed, i))
    mask = np.ones(24, bool)
    mask[list(x.keyframe_indices)] = False
    clean = images[np.repeat(np.arange(4), np.diff(x.span_bounds))]
    devs.append((x.features[mask, 0] - clean[mask, 0]) / abs(x.v_bar))
print("empirical beta:", round(float(np.concatenate(devs).std()), 4))
