"""Aligned keyframe matching (AKM).

A prediction of ``N`` chronologically ordered keyframes is scored against
``M >= N`` reference slots.  Each prediction is assigned to a distinct slot,
assignments must keep chronological order, and the score is the mean
matching value under the best assignment.  Two matchers are supported:

* ``exact`` - 1 if the predicted frame is one of the slot's keyframes.
* ``cosine`` - the best clamped cosine similarity between mean-centred
  features of the predicted frame and any of the slot's keyframes.

The optimum is found with an O(NM) dynamic programme; :func:`akm_bruteforce`
enumerates all assignments and exists to test it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import PredictedSummary, ReferenceSlot, VideoRecord, check_prediction_fits
from .errors import CombinatorialLimitError, ValidationError
from .features import FeatureMatrix, centered_rows

EXACT = "exact"
COSINE = "cosine"
_ALIASES = {"exact": EXACT, "ex": EXACT, "cosine": COSINE, "cos": COSINE}

ZERO_NORM = 1e-12
BRUTEFORCE_LIMIT = 10**6


def matcher_kind(name: str) -> str:
    try:
        return _ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown matcher {name!r}; use 'exact' or 'cosine'") from None


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """``s[i, j]`` is the match value of prediction ``i`` against slot ``j``."""

    s: np.ndarray
    matcher_kind: str = EXACT

    def __post_init__(self):
        s = np.array(self.s, dtype=np.float64, copy=True)
        if s.ndim != 2 or s.shape[0] < 1:
            raise ValidationError("score matrix must be 2-d with at least one row")
        if s.shape[0] > s.shape[1]:
            raise ValidationError(
                f"prediction longer than references (N={s.shape[0]} > M={s.shape[1]})"
            )
        if np.any(s < 0) or np.any(s > 1) or not np.all(np.isfinite(s)):
            raise ValidationError("score matrix entries must lie in [0, 1]")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def shape(self) -> tuple[int, int]:
        return self.s.shape


@dataclass(frozen=True)
class Alignment:
    assign: tuple[int, ...]
    score: float


def match_exact(p: int, slot: ReferenceSlot) -> int:
    return 1 if p in slot.keyframes else 0


def _clamped_cosines(u: np.ndarray, rows: np.ndarray) -> np.ndarray:
    # u: (d,), rows: (K, d); zero-norm pairs contribute 0; clip absorbs 1+ulp rounding
    nu = float(np.linalg.norm(u))
    nr = np.linalg.norm(rows, axis=1)
    out = np.zeros(rows.shape[0])
    if nu < ZERO_NORM:
        return out
    ok = nr >= ZERO_NORM
    out[ok] = (rows[ok] @ u) / (nr[ok] * nu)
    return np.clip(out, 0.0, 1.0)


def cosine_match_value(u, v) -> float:
    """``max(0, cos(u, v))`` with the zero-vector rule (either norm < 1e-12 gives 0)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(_clamped_cosines(u, v[None, :])[0])


def match_cos(p: int, slot: ReferenceSlot, fm: FeatureMatrix) -> float:
    """Relaxed match: best clamped cosine between ``p`` and any slot keyframe."""
    u = centered_rows(fm, [p])[0]
    rows = centered_rows(fm, slot.keyframes)
    return float(_clamped_cosines(u, rows).max())


def akm_score_matrix(
    pred: PredictedSummary,
    refs: VideoRecord,
    matcher: str = EXACT,
    fm: FeatureMatrix | None = None,
) -> ScoreMatrix:
    kind = matcher_kind(matcher)
    check_prediction_fits(pred, refs)
    n, m = pred.N, refs.M
    s = np.zeros((n, m))
    if kind == EXACT:
        for j, slot in enumerate(refs.references):
            keys = set(slot.keyframes)
            for i, f in enumerate(pred.frames):
                s[i, j] = 1.0 if f in keys else 0.0
    else:
        if fm is None:
            raise ValidationError(f"{refs.video_id}: cosine matcher needs a feature matrix")
        if fm.num_frames < refs.num_frames:
            raise ValidationError(
                f"{refs.video_id}: feature matrix has {fm.num_frames} rows, "
                f"video has {refs.num_frames} frames"
            )
        p_rows = centered_rows(fm, pred.frames)
        for j, slot in enumerate(refs.references):
            a_rows = centered_rows(fm, slot.keyframes)
            for i in range(n):
                s[i, j] = _clamped_cosines(p_rows[i], a_rows).max()
    return ScoreMatrix(s, kind)


def _as_array(S) -> np.ndarray:
    return S.s if isinstance(S, ScoreMatrix) else ScoreMatrix(S).s


def akm_align(S) -> Alignment:
    """Best order-preserving assignment of predictions to reference slots.

    Fills ``D[i][j] = max(D[i][j-1], D[i-1][j-1] + S[i-1][j-1])`` with
    ``D[0][*] = 0`` and ``D[i>0][0] = -inf`` (every prediction must be
    placed).  Backtracking prefers the skip move on ties, which yields the
    leftmost optimal assignment.
    """
    s = _as_array(S)
    n, m = s.shape
    neg = -math.inf
    D = [[0.0] * (m + 1)] + [[neg] * (m + 1) for _ in range(n)]
    for i in range(1, n + 1):
        prev, cur, row = D[i - 1], D[i], s[i - 1]
        for j in range(i, m + 1):
            take = prev[j - 1] + float(row[j - 1])
            cur[j] = take if take > cur[j - 1] else cur[j - 1]
    assign = [0] * n
    i, j = n, m
    while i > 0:
        if D[i][j] == D[i][j - 1]:
            j -= 1
        else:
            assign[i - 1] = j - 1
            i -= 1
            j -= 1
    return Alignment(tuple(assign), D[n][m] / n)


def akm_bruteforce(S) -> float:
    """Enumerate every strictly increasing assignment and return the best mean."""
    s = _as_array(S)
    n, m = s.shape
    if math.comb(m, n) > BRUTEFORCE_LIMIT:
        raise CombinatorialLimitError(f"C({m},{n}) assignments exceed {BRUTEFORCE_LIMIT}")
    best = -math.inf
    for cols in itertools.combinations(range(m), n):
        total = 0.0
        for i, j in enumerate(cols):
            total += float(s[i, j])
        best = max(best, total)
    return best / n


def akm_ex(pred: PredictedSummary, refs: VideoRecord) -> float:
    return akm_align(akm_score_matrix(pred, refs, EXACT)).score


def akm_cos(pred: PredictedSummary, refs: VideoRecord, fm: FeatureMatrix) -> float:
    return akm_align(akm_score_matrix(pred, refs, COSINE, fm)).score


def akm(pred: PredictedSummary, refs: VideoRecord, matcher: str = EXACT, fm=None) -> Alignment:
    return akm_align(akm_score_matrix(pred, refs, matcher, fm))
