"""Choose N keyframe-caption candidates from scored video segments.

Candidates are first pre-filtered (overly long segments are dropped) and
sorted by segment end time.  Selection then maximises total utility
``segment_weight * segment_score + caption_weight * caption_score``:

* ``hard`` mode requires the N segments to be pairwise disjoint
  (weighted interval scheduling with an exact cardinality constraint);
* ``soft`` mode allows overlap but, walking the chosen candidates in sorted
  order, subtracts ``overlap_penalty_per_s`` times the overlap in seconds
  between each candidate and the one chosen just before it.

When no N disjoint segments exist, hard mode falls back to soft mode and
says so in the returned :class:`Selection`.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .core import Candidate, PredictedSummary
from .errors import CombinatorialLimitError, InfeasibleError, ValidationError

HARD = "hard"
SOFT = "soft"
BRUTEFORCE_LIMIT = 10**6


@dataclass(frozen=True)
class SelectorConfig:
    n: int
    max_segment_fraction: float = 0.75
    mode: str = HARD
    overlap_penalty_per_s: float = 1.0
    segment_weight: float = 1.0
    caption_weight: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be positive")
        if not 0 < self.max_segment_fraction <= 1:
            raise ValidationError("max_segment_fraction must lie in (0, 1]")
        if self.mode not in (HARD, SOFT):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.overlap_penalty_per_s < 0:
            raise ValidationError("overlap_penalty_per_s must be non-negative")


@dataclass(frozen=True)
class Selection:
    """Chosen candidates (chronological), their indices into the sorted input,
    the objective value and the mode actually used."""

    candidates: tuple[Candidate, ...]
    indices: tuple[int, ...]
    objective: float
    mode: str
    fell_back: bool = False

    def to_prediction(self) -> PredictedSummary:
        vid = self.candidates[0].video_id
        pairs = sorted((c.keyframe, c.caption) for c in self.candidates)
        return PredictedSummary(vid, tuple(pairs))


def _sort_key(c: Candidate):
    return (c.segment_end_s, c.segment_start_s)


def prefilter(cands: Sequence[Candidate], duration_s: float, cfg: SelectorConfig) -> list[Candidate]:
    """Drop segments longer than ``max_segment_fraction * duration_s``; sort by (end, start)."""
    limit = cfg.max_segment_fraction * duration_s
    for c in cands:
        if not c.has_segment:
            raise ValidationError(f"{c.video_id}: selector candidates need segment bounds")
    kept = [c for c in cands if c.length_s <= limit]
    return sorted(kept, key=_sort_key)


def utility(c: Candidate, cfg: SelectorConfig) -> float:
    return cfg.segment_weight * c.segment_score + cfg.caption_weight * c.caption_score


def overlap_seconds(a: Candidate, b: Candidate) -> float:
    """Length of the intersection of two half-open segments."""
    return max(0.0, min(a.segment_end_s, b.segment_end_s) - max(a.segment_start_s, b.segment_start_s))


def _check_sorted(cands: Sequence[Candidate]) -> None:
    ends = [c.segment_end_s for c in cands]
    if any(b < a for a, b in zip(ends, ends[1:])):
        raise ValidationError("candidates must be sorted by segment end time")


def _better(val, idx, best_val, best_idx) -> bool:
    if best_idx is None:
        return True
    return val > best_val or (val == best_val and idx < best_idx)


def _hard_dp(cands, cfg):
    """D[c][k]: best (value, index tuple) choosing k disjoint among the first c."""
    C, N = len(cands), cfg.n
    u = [utility(c, cfg) for c in cands]
    ends = [c.segment_end_s for c in cands]
    # pred[c]: number of candidates ending at or before the start of c
    pred = [bisect.bisect_right(ends, c.segment_start_s) for c in cands]
    empty = (0.0, ())
    D = [[empty] + [None] * N for _ in range(C + 1)]
    for c in range(1, C + 1):
        p = pred[c - 1]
        for k in range(1, N + 1):
            best = D[c - 1][k]
            prev = D[p][k - 1]
            if prev is not None:
                val, idx = prev[0] + u[c - 1], prev[1] + (c - 1,)
                if best is None or _better(val, idx, best[0], best[1]):
                    best = (val, idx)
            D[c][k] = best
    return D[C][N]


def _soft_dp(cands, cfg):
    """F[c][k]: best chain of k candidates ending with candidate c."""
    C, N = len(cands), cfg.n
    lam = cfg.overlap_penalty_per_s
    u = [utility(c, cfg) for c in cands]
    F = [[None] * (N + 1) for _ in range(C)]
    for c in range(C):
        F[c][1] = (u[c], (c,))
        for k in range(2, min(N, c + 1) + 1):
            best = None
            for j in range(k - 2, c):
                prev = F[j][k - 1]
                if prev is None:
                    continue
                val = prev[0] + (u[c] - lam * overlap_seconds(cands[j], cands[c]))
                idx = prev[1] + (c,)
                if best is None or _better(val, idx, best[0], best[1]):
                    best = (val, idx)
            F[c][k] = best
    best = None
    for c in range(C):
        cur = F[c][N]
        if cur is not None and (best is None or _better(cur[0], cur[1], best[0], best[1])):
            best = cur
    return best


def _finish(cands, found, mode, fell_back) -> Selection:
    val, idx = found
    return Selection(tuple(cands[i] for i in idx), idx, val, mode, fell_back)


def select_n_dp(cands: Sequence[Candidate], cfg: SelectorConfig) -> Selection:
    """Exact optimum by dynamic programming; ``cands`` must be sorted by end time.

    Raises:
        InfeasibleError: fewer than ``cfg.n`` candidates are available.
    """
    if not cands:
        raise InfeasibleError("no candidates to select from")
    _check_sorted(cands)
    if len(cands) < cfg.n:
        raise InfeasibleError(f"need {cfg.n} candidates, only {len(cands)} available")
    if cfg.mode == HARD:
        found = _hard_dp(cands, cfg)
        if found is not None:
            return _finish(cands, found, HARD, False)
        return _finish(cands, _soft_dp(cands, cfg), SOFT, True)
    return _finish(cands, _soft_dp(cands, cfg), SOFT, False)


def objective(cands: Sequence[Candidate], idx: Sequence[int], cfg: SelectorConfig, mode: str) -> float | None:
    """Objective of an increasing index tuple; ``None`` if infeasible in hard mode."""
    chosen = [cands[i] for i in idx]
    if mode == HARD:
        for a, b in itertools.combinations(chosen, 2):
            if overlap_seconds(a, b) > 0:
                return None
        total = 0.0
        for c in chosen:
            total += utility(c, cfg)
        return total
    total = utility(chosen[0], cfg)
    for a, b in zip(chosen, chosen[1:]):
        total += utility(b, cfg) - cfg.overlap_penalty_per_s * overlap_seconds(a, b)
    return total


def select_bruteforce(cands: Sequence[Candidate], cfg: SelectorConfig) -> Selection:
    """Evaluate every N-subset; ties go to the lexicographically smallest index tuple."""
    _check_sorted(cands)
    if len(cands) < cfg.n:
        raise InfeasibleError(f"need {cfg.n} candidates, only {len(cands)} available")
    if math.comb(len(cands), cfg.n) > BRUTEFORCE_LIMIT:
        raise CombinatorialLimitError(f"C({len(cands)},{cfg.n}) subsets exceed {BRUTEFORCE_LIMIT}")

    def search(mode):
        best_val, best_idx = None, None
        for idx in itertools.combinations(range(len(cands)), cfg.n):
            val = objective(cands, idx, cfg, mode)
            if val is not None and (best_idx is None or val > best_val):
                best_val, best_idx = val, idx
        return None if best_idx is None else (best_val, best_idx)

    if cfg.mode == HARD:
        found = search(HARD)
        if found is not None:
            return _finish(cands, found, HARD, False)
        return _finish(cands, search(SOFT), SOFT, True)
    return _finish(cands, search(SOFT), SOFT, False)


def select_summary(cands: Sequence[Candidate], duration_s: float, cfg: SelectorConfig) -> Selection:
    """Pre-filter, then run the DP selector."""
    return select_n_dp(prefilter(cands, duration_s, cfg), cfg)
