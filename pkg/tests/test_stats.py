import random

import pytest

from conftest import make_record
from vidsum.errors import VidsumError
from vidsum.stats import compute_stats


def test_single_video_tallies():
    rec = make_record("v", [("one two three four", [1, 2, 3]), ("five six seven eight", [7])], num_frames=10)
    s = compute_stats([rec])
    assert (s.num_videos, s.avg_keyframes_per_caption, s.avg_captions_per_video, s.avg_words_per_caption) == (
        1, 2.0, 2.0, 4.0,
    )
    assert s.tokenizer == "whitespace"


def test_empty():
    with pytest.raises(VidsumError):
        compute_stats([])


def _random_dataset(r, count):
    recs = []
    for v in range(count):
        slots = []
        for j in range(r.randint(1, 6)):
            kf = r.sample(range(40), r.randint(1, 5))
            slots.append((" ".join("w" * r.randint(1, 3) for _ in range(r.randint(1, 12))), kf))
        recs.append(make_record(f"v{v}", slots, num_frames=40))
    return recs


def test_matches_recount():
    r = random.Random(5)
    recs = _random_dataset(r, 20)
    caps = [s for rec in recs for s in rec.references]
    s = compute_stats(recs)
    assert s.num_videos == 20
    assert s.num_captions == len(caps)
    assert s.avg_captions_per_video == len(caps) / 20
    assert s.avg_keyframes_per_caption == sum(len(c.keyframes) for c in caps) / len(caps)
    assert s.avg_words_per_caption == sum(len(c.caption.split()) for c in caps) / len(caps)


def test_order_invariance_and_concatenation():
    r = random.Random(9)
    a, b = _random_dataset(r, 7), _random_dataset(r, 11)
    sa, sb, sab = compute_stats(a), compute_stats(b), compute_stats(a + b)
    assert compute_stats(list(reversed(a + b))) == sab
    assert sab.num_videos == sa.num_videos + sb.num_videos
    assert sab.num_captions == sa.num_captions + sb.num_captions
    assert sab.avg_keyframes_per_caption == pytest.approx(
        (sa.avg_keyframes_per_caption * sa.num_captions + sb.avg_keyframes_per_caption * sb.num_captions)
        / sab.num_captions
    )


def test_table_text():
    rec = make_record("v", [("a b", [1])], num_frames=4)
    text = compute_stats([rec]).table()
    assert "Number of videos" in text and "2.00" in text
