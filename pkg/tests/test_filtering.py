import math

import numpy as np
import pytest

from conftest import make_record
from vidsum.core import ReferenceSlot
from vidsum.errors import ValidationError
from vidsum.features import FeatureMatrix
from vidsum.filtering import FilterConfig, filter_dataset, filter_slot, slot_centroid, spread


def fm_from(values, dim=1):
    rows = np.asarray(values, dtype=np.float64).reshape(-1, dim)
    return FeatureMatrix.from_rows("v", rows)


def test_centroid_examples(rng):
    fm = fm_from([[0, 0], [2, 2], [5, 5]], dim=2)
    np.testing.assert_array_equal(slot_centroid(ReferenceSlot("c", (2,)), fm), [5, 5])
    np.testing.assert_array_equal(slot_centroid(ReferenceSlot("c", (0, 1)), fm), [1, 1])
    rows = rng.normal(size=(9, 4))
    fm = FeatureMatrix.from_rows("v", rows)
    idx = [0, 2, 3, 7, 8]
    expected = [sum(rows[i][k] for i in idx) / 5 for k in range(4)]
    np.testing.assert_allclose(slot_centroid(ReferenceSlot("c", tuple(idx)), fm), expected, atol=1e-6)


def test_singleton_slot():
    r = filter_slot(ReferenceSlot("c", (1,)), fm_from([0.0, 3.0]))
    assert r.kept.keyframes == (1,) and not r.removed
    assert r.variance_before == 0.0 == r.variance_after


def test_three_point_example():
    # distances to centroid 3.3667: 3.3667, 3.2667, 6.6333; mean 4.4222,
    # population std 1.5641, threshold 5.9863 -> the point at 10 goes
    r = filter_slot(ReferenceSlot("c", (0, 1, 2)), fm_from([0.0, 0.1, 10.0]))
    assert r.removed == {2}
    assert r.kept.keyframes == (0, 1)
    # before: mean squared distance to 3.3667 over three points
    c = 10.1 / 3
    before = ((0 - c) ** 2 + (0.1 - c) ** 2 + (10 - c) ** 2) / 3
    assert r.variance_before == pytest.approx(before)
    assert r.variance_after == pytest.approx(0.0025)
    assert r.variance_after < r.variance_before


def test_infinite_k_removes_nothing(rng):
    fm = FeatureMatrix.from_rows("v", rng.normal(size=(10, 3)))
    r = filter_slot(ReferenceSlot("c", tuple(range(10))), fm, FilterConfig(k_sigma=math.inf))
    assert not r.removed


def test_min_keep_on_all_outliers():
    # with k_sigma=0 every above-mean point would go; min_keep=3 forces all three back
    fm = fm_from([0.0, 1.0, 50.0])
    r = filter_slot(ReferenceSlot("c", (0, 1, 2)), fm, FilterConfig(k_sigma=0.0, min_keep=3))
    assert r.kept.keyframes == (0, 1, 2)
    r = filter_slot(ReferenceSlot("c", (0, 1, 2)), fm, FilterConfig(k_sigma=0.0, min_keep=2))
    assert len(r.kept.keyframes) == 2


def test_config_validation():
    with pytest.raises(ValidationError):
        FilterConfig(min_keep=0)
    with pytest.raises(ValidationError):
        FilterConfig(k_sigma=-1)


def planted_slot(rng, m, dim):
    """2m inliers at unit distance from an integer centre plus one far outlier (the last frame).

    The inliers are centre +/- e_i for m distinct axes, so their centroid is the
    centre exactly and every inlier distance is exactly 1.
    """
    centre = rng.integers(-5, 6, size=dim).astype(np.float64)
    axes = rng.choice(dim, size=m, replace=False)
    eye = np.eye(dim)
    pts = [centre + s * eye[a] for a in axes for s in (1.0, -1.0)]
    far = centre + rng.integers(20, 40, size=dim)
    return np.vstack(pts + [far])


def test_planted_outliers_removed_and_idempotent(rng):
    for _ in range(100):
        dim = int(rng.integers(1, 8))
        m = int(rng.integers(1, dim + 1))
        rows = planted_slot(rng, m, dim)
        fm = FeatureMatrix.from_rows("v", rows)
        k = 2 * m
        slot = ReferenceSlot("c", tuple(range(k + 1)))
        r = filter_slot(slot, fm)
        assert r.removed == {k}
        assert r.variance_after <= r.variance_before
        again = filter_slot(r.kept, fm)
        assert again.kept == r.kept and not again.removed


def test_variance_never_increases(rng):
    for _ in range(300):
        n, dim = int(rng.integers(1, 15)), int(rng.integers(1, 6))
        fm = FeatureMatrix.from_rows("v", rng.standard_t(2, size=(n, dim)))
        cfg = FilterConfig(k_sigma=float(rng.choice([0.0, 0.5, 1.0, 2.0])), min_keep=int(rng.integers(1, 4)))
        r = filter_slot(ReferenceSlot("c", tuple(range(n))), fm, cfg)
        assert r.variance_after <= r.variance_before
        assert len(r.kept.keyframes) >= min(cfg.min_keep, n)
        assert set(r.kept.keyframes) <= set(range(n))


def test_spread_is_dimension_averaged():
    X = np.array([[0.0, 0.0], [2.0, 4.0]])
    # squared distances to (1, 2) are 5 and 5; divide by dim 2
    assert spread(X) == 2.5


def test_filter_dataset_identity_for_singletons(rng):
    rec = make_record("v", [("a", [1]), ("b", [4]), ("c", [9])], num_frames=12)
    fm = FeatureMatrix.from_rows("v", rng.normal(size=(12, 3)))
    out, report = filter_dataset([rec], {"v": fm})
    assert out == [rec]
    assert report.keyframes_removed == 0
    assert report.corpus_variance_before == 0.0


def test_filter_dataset_planted(rng):
    rows = rng.normal(size=(40, 4)) * 0.01
    rows[9] += 20.0
    rows[25] -= 20.0
    fm = FeatureMatrix.from_rows("v", rows)
    rec = make_record("v", [("a", [2, 3, 4, 5, 9]), ("b", [20, 21, 22, 25])], num_frames=40)
    out, report = filter_dataset([rec], {"v": fm})
    assert [s.keyframes for s in out[0].references] == [(2, 3, 4, 5), (20, 21, 22)]
    assert report.keyframes_removed == 2 and report.keyframes_before == 9
    assert report.corpus_variance_after < report.corpus_variance_before
    d = report.to_dict()
    assert d["videos"][0]["slots"][0]["removed"] == [9]
