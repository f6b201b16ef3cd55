import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_record
from vidsum.akm import (
    ScoreMatrix,
    akm_align,
    akm_bruteforce,
    akm_cos,
    akm_ex,
    akm_score_matrix,
    cosine_match_value,
    match_cos,
    match_exact,
)
from vidsum.core import PredictedSummary, ReferenceSlot
from vidsum.errors import CombinatorialLimitError, ValidationError
from vidsum.features import FeatureMatrix


def independent_match_cos(rows, p, keyframes):
    """Plain-Python recomputation: centre on the video mean, cosine, clamp."""
    rows = [[float(x) for x in r] for r in rows]
    n, d = len(rows), len(rows[0])
    mean = [sum(r[k] for r in rows) / n for k in range(d)]
    u = [rows[p][k] - mean[k] for k in range(d)]
    best = 0.0
    for a in keyframes:
        v = [rows[a][k] - mean[k] for k in range(d)]
        nu = math.sqrt(sum(x * x for x in u))
        nv = math.sqrt(sum(x * x for x in v))
        if nu < 1e-12 or nv < 1e-12:
            continue
        best = max(best, sum(x * y for x, y in zip(u, v)) / (nu * nv))
    return best


def pred(frames, vid="v"):
    return PredictedSummary(vid, tuple((f, f"c{f}") for f in frames))


# --- matchers ---------------------------------------------------------------


@pytest.mark.parametrize("p,kf,expected", [(6, (2, 6, 9), 1), (7, (2, 6, 9), 0), (6, (6,), 1)])
def test_match_exact(p, kf, expected):
    assert match_exact(p, ReferenceSlot("c", kf)) == expected


def test_match_cos_identical_vectors():
    # rows 0 and 2 are equal, so their centred vectors are equal and non-zero
    fm = FeatureMatrix.from_rows("v", [[1.0, 2.0], [0.0, 0.0], [1.0, 2.0], [5.0, -1.0]])
    assert match_cos(0, ReferenceSlot("c", (2,)), fm) == pytest.approx(1.0, abs=1e-12)


def test_cosine_clamp_and_value():
    assert cosine_match_value([1, 0], [-1, 0]) == 0.0
    assert cosine_match_value([1, 0], [1, 1]) == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    assert cosine_match_value([0, 0], [1, 1]) == 0.0


def test_match_cos_centred_pair():
    # mean is (0, 0); centred rows are (1,0), (-1,0), (1,1), (-1,-1)
    fm = FeatureMatrix.from_rows("v", [[1, 0], [-1, 0], [1, 1], [-1, -1]])
    assert match_cos(0, ReferenceSlot("c", (1,)), fm) == 0.0
    assert match_cos(0, ReferenceSlot("c", (2,)), fm) == pytest.approx(0.7071, abs=1e-4)
    assert match_cos(0, ReferenceSlot("c", (1, 2)), fm) == pytest.approx(0.7071, abs=1e-4)
    with pytest.raises(IndexError):
        match_cos(7, ReferenceSlot("c", (1,)), fm)


def test_match_cos_symmetric_and_scale_invariant(rng):
    for _ in range(50):
        u, v = rng.normal(size=5), rng.normal(size=5)
        a, b = rng.uniform(0.1, 10, size=2)
        assert cosine_match_value(u, v) == pytest.approx(cosine_match_value(v, u), abs=1e-12)
        assert cosine_match_value(a * u, b * v) == pytest.approx(cosine_match_value(u, v), abs=1e-12)
    rows = rng.normal(size=(12, 4))
    fm = FeatureMatrix.from_rows("v", rows)
    for p, q in itertools.combinations(range(12), 2):
        assert match_cos(p, ReferenceSlot("c", (q,)), fm) == pytest.approx(
            match_cos(q, ReferenceSlot("c", (p,)), fm), abs=1e-12
        )


# --- score matrix -----------------------------------------------------------


def test_score_matrix_exact_small():
    rec = make_record("v", [("a", [2])], num_frames=12)
    assert akm_score_matrix(pred([2]), rec).s.tolist() == [[1.0]]
    rec = make_record("v", [("a", [2]), ("b", [5]), ("c", [9])], num_frames=12)
    assert akm_score_matrix(pred([2, 9]), rec).s.tolist() == [[1, 0, 0], [0, 0, 1]]


def test_score_matrix_errors():
    rec = make_record("v", [("a", [2])], num_frames=12)
    with pytest.raises(ValidationError, match="longer"):
        akm_score_matrix(pred([1, 2]), rec)
    with pytest.raises(ValidationError, match="feature"):
        akm_score_matrix(pred([1]), rec, "cosine")


def test_cosine_matrix_cell_by_cell(rng):
    rows = rng.normal(size=(30, 7))
    fm = FeatureMatrix.from_rows("v", rows)
    slots = [("s%d" % j, sorted(rng.choice(30, size=rng.integers(1, 4), replace=False).tolist())) for j in range(6)]
    rec = make_record("v", slots, num_frames=30)
    p = pred(sorted(rng.choice(30, size=4, replace=False).tolist()))
    S = akm_score_matrix(p, rec, "cos", fm).s
    assert S.shape == (4, 6)
    for i, f in enumerate(p.frames):
        for j, slot in enumerate(rec.references):
            assert S[i, j] == pytest.approx(independent_match_cos(rows, f, slot.keyframes), abs=1e-12)


# --- alignment --------------------------------------------------------------


def test_align_examples():
    al = akm_align([[1, 0, 0], [0, 0, 1]])
    assert al.score == 1.0 and al.assign == (0, 2)
    assert akm_bruteforce([[1, 0, 0], [0, 0, 1]]) == 1.0

    al = akm_align([[0, 1, 0], [0, 1, 0]])
    assert al.score == 0.5
    assert akm_bruteforce([[0, 1, 0], [0, 1, 0]]) == 0.5

    al = akm_align(np.zeros((3, 5)))
    assert al.score == 0.0 and al.assign == (0, 1, 2)


def test_bruteforce_square_is_diagonal():
    S = [[0.4, 0.9], [0.8, 0.1]]
    assert akm_bruteforce(S) == pytest.approx(0.25)
    assert akm_align(S).score == pytest.approx(0.25)
    assert akm_align(S).assign == (0, 1)


def test_bruteforce_limit():
    with pytest.raises(CombinatorialLimitError):
        akm_bruteforce(np.zeros((10, 40)))


def test_score_matrix_rejects_bad_input():
    with pytest.raises(ValidationError):
        ScoreMatrix([[1.5]])
    with pytest.raises(ValidationError):
        ScoreMatrix([[0.1], [0.2]])


score_matrices = st.integers(1, 4).flatmap(
    lambda n: st.integers(n, 8).flatmap(
        lambda m: st.lists(
            st.lists(st.floats(0, 1), min_size=m, max_size=m), min_size=n, max_size=n
        )
    )
)


@settings(max_examples=300, deadline=None)
@given(score_matrices)
def test_align_equals_bruteforce(S):
    al = akm_align(S)
    assert abs(al.score - akm_bruteforce(S)) <= 1e-9
    a = al.assign
    assert all(x < y for x, y in zip(a, a[1:]))
    assert 0 <= a[0] and a[-1] < len(S[0])
    assert sum(S[i][j] for i, j in enumerate(a)) / len(S) == pytest.approx(al.score, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(score_matrices, st.data())
def test_alignment_is_leftmost_optimum(S, data):
    # among all optimal assignments, the returned one is the one that is
    # smallest when compared from the last prediction backwards
    n, m = len(S), len(S[0])
    best = akm_align(S)
    opt = [
        c for c in itertools.combinations(range(m), n)
        if sum(S[i][j] for i, j in enumerate(c)) == max(
            sum(S[i][j] for i, j in enumerate(d)) for d in itertools.combinations(range(m), n)
        )
    ]
    assert best.assign in opt


def test_append_slot_never_decreases(rng):
    for _ in range(200):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, m + 1))
        S = rng.random((n, m))
        pos = int(rng.integers(0, m + 1))
        T = np.insert(S, pos, rng.random(n), axis=1)
        assert akm_align(T).score >= akm_align(S).score - 1e-15


def test_akm_exact_perfect_and_partial():
    rec = make_record("v", [("a", [1, 2]), ("b", [6]), ("c", [10, 11]), ("d", [15])], num_frames=20)
    assert akm_ex(pred([2, 6, 11, 15]), rec) == 1.0
    assert akm_ex(pred([2, 6, 12, 15]), rec) == 0.75
    assert akm_ex(pred([0, 5, 9, 19]), rec) == 0.0


def test_exact_score_one_iff_all_ones_assignment(rng):
    for _ in range(200):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, m + 1))
        S = (rng.random((n, m)) < 0.4).astype(float)
        has_perfect = any(all(S[i, j] == 1 for i, j in enumerate(c)) for c in itertools.combinations(range(m), n))
        assert (akm_align(S).score == 1.0) == has_perfect


def test_akm_cos_constant_features_is_zero():
    rec = make_record("v", [("a", [1]), ("b", [6])], num_frames=10)
    fm = FeatureMatrix.from_rows("v", np.ones((10, 4)))
    assert akm_cos(pred([1, 6]), rec, fm) == 0.0


def test_akm_cos_bounds(rng):
    rec = make_record("v", [("a", [1, 3]), ("b", [6]), ("c", [8, 9])], num_frames=12)
    for _ in range(20):
        fm = FeatureMatrix.from_rows("v", rng.normal(size=(12, 3)))
        score = akm_cos(pred(sorted(rng.choice(12, 2, replace=False).tolist())), rec, fm)
        assert 0.0 <= score <= 1.0
