"""Width-W beam search over chronologically increasing (frame, caption) pairs.

Each round extends every surviving beam with every (frame, caption) whose
frame comes after the beam's last frame.  A :class:`Scorer` supplies two
log-likelihood-like components per expansion: one for picking the frame and
one for the caption.  Within a round the two components are min-max
normalised separately, over either each beam's own expansions
(``per_beam``, the default) or all expansions of the round
(``step_global``), and the
expansion contributes ``alpha * frame + (1 - alpha) * caption`` to the
beam's running sum.  The reported score is that sum divided by N.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence


from .core import Candidate, PredictedSummary, _iter_jsonl
from .errors import CombinatorialLimitError, FormatError, InfeasibleError, ValidationError

STEP_GLOBAL = "step_global"
PER_BEAM = "per_beam"
EXHAUSTIVE_LIMIT = 10**6

Pair = tuple[int, str]


class Scorer(Protocol):
    prefix_sensitive: bool

    def score_components(
        self, prefix: Sequence[Pair], cand_frame: int, cand_caption: str
    ) -> tuple[float, float]:
        """Return ``(frame_ll, caption_ll)`` for appending the candidate to ``prefix``."""
        ...


@dataclass(frozen=True)
class BeamConfig:
    n: int
    width: int = 8
    alpha: float = 0.5
    norm_pool: str = PER_BEAM

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be positive")
        if self.width < 1:
            raise ValidationError("beam width must be at least 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError("alpha must lie in [0, 1]")
        if self.norm_pool not in (STEP_GLOBAL, PER_BEAM):
            raise ValidationError(f"unknown norm_pool {self.norm_pool!r}")


@dataclass(frozen=True)
class BeamState:
    pairs: tuple[Pair, ...] = ()
    norm_sum_frame: float = 0.0
    norm_sum_caption: float = 0.0
    total: float = 0.0

    @property
    def last_frame(self) -> int:
        return self.pairs[-1][0] if self.pairs else -1

    def rank_key(self):
        frames = tuple(f for f, _ in self.pairs)
        captions = tuple(c for _, c in self.pairs)
        return (-self.total, frames, captions)


def minmax_normalize(values) -> list[float]:
    """Affine map onto [0, 1]; a constant list maps to 0.5 everywhere."""
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("cannot normalise an empty list")
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("non-finite value in normalisation pool")
    lo, hi = min(vals), max(vals)
    if hi == lo:
        return [0.5] * len(vals)
    span = hi - lo
    return [(v - lo) / span for v in vals]


def _normalize_choices(frames_captions) -> list[tuple[int, tuple[str, ...]]]:
    """Accept ``{frame: [captions]}`` or ``[(frame, [captions]), ...]``."""
    items = frames_captions.items() if isinstance(frames_captions, Mapping) else frames_captions
    out = []
    for f, caps in items:
        caps = tuple(caps)
        if not caps:
            raise ValidationError(f"frame {f} has no candidate captions")
        out.append((int(f), caps))
    out.sort(key=lambda t: t[0])
    frames = [f for f, _ in out]
    if len(set(frames)) != len(frames):
        raise ValidationError("duplicate frame in candidate list")
    return out


def _contributions(comps, alpha):
    nf = minmax_normalize([c[0] for c in comps])
    nc = minmax_normalize([c[1] for c in comps])
    return [(a, b, alpha * a + (1 - alpha) * b) for a, b in zip(nf, nc)]


def _extend(state: BeamState, pair: Pair, nf: float, nc: float, contrib: float) -> BeamState:
    return BeamState(
        state.pairs + (pair,),
        state.norm_sum_frame + nf,
        state.norm_sum_caption + nc,
        state.total + contrib,
    )


def beam_select(frames_captions, scorer: Scorer, cfg: BeamConfig, video_id: str = ""):
    """Run the beam search; returns ``(PredictedSummary, score)``.

    Raises:
        InfeasibleError: a round produces no expansion because every beam has
            already used the last available frame.
    """
    choices = _normalize_choices(frames_captions)
    if len(choices) < cfg.n:
        raise InfeasibleError(f"{video_id}: {len(choices)} frames available, need {cfg.n}")
    beams = [BeamState()]
    for rnd in range(1, cfg.n + 1):
        expansions = []  # (beam index, pair, frame_ll, caption_ll)
        for b, state in enumerate(beams):
            last = state.last_frame
            prefix = list(state.pairs)
            for f, caps in choices:
                if f <= last:
                    continue
                for cap in caps:
                    fl, cl = scorer.score_components(prefix, f, cap)
                    expansions.append((b, (f, cap), fl, cl))
        if not expansions:
            raise InfeasibleError(f"{video_id}: no frames remain reachable in round {rnd} of {cfg.n}")

        if cfg.norm_pool == STEP_GLOBAL:
            contrib = _contributions([(e[2], e[3]) for e in expansions], cfg.alpha)
        else:
            contrib = [None] * len(expansions)
            by_beam: dict[int, list[int]] = {}
            for k, e in enumerate(expansions):
                by_beam.setdefault(e[0], []).append(k)
            for ks in by_beam.values():
                for k, c in zip(ks, _contributions([(expansions[k][2], expansions[k][3]) for k in ks], cfg.alpha)):
                    contrib[k] = c

        candidates: dict[tuple, BeamState] = {}
        for (b, pair, _, _), (nf, nc, c) in zip(expansions, contrib):
            new = _extend(beams[b], pair, nf, nc, c)
            old = candidates.get(new.pairs)
            if old is None or new.total > old.total:
                candidates[new.pairs] = new
        beams = sorted(candidates.values(), key=BeamState.rank_key)[: cfg.width]

    best = beams[0]
    return PredictedSummary(video_id, best.pairs), best.total / cfg.n


def exhaustive_select(frames_captions, scorer: Scorer, cfg: BeamConfig, video_id: str = ""):
    """Unpruned search: the limit of :func:`beam_select` as the width grows.

    Every increasing path is enumerated directly.  With ``step_global``
    pooling the round-r pool is the set of all length-r paths; with
    ``per_beam`` it is the set of one-step extensions of the path's own
    prefix.
    """
    choices = _normalize_choices(frames_captions)
    n = cfg.n
    if len(choices) < n:
        raise InfeasibleError(f"{video_id}: {len(choices)} frames available, need {n}")
    total_paths = count_paths(choices, n)
    if total_paths > EXHAUSTIVE_LIMIT:
        raise CombinatorialLimitError(f"{total_paths} paths exceed {EXHAUSTIVE_LIMIT}")

    def paths(r):
        for combo in itertools.combinations(choices, r):
            for caps in itertools.product(*(c for _, c in combo)):
                yield tuple(zip((f for f, _ in combo), caps))

    def components(p):
        return scorer.score_components(list(p[:-1]), p[-1][0], p[-1][1])

    # contribution of the last pair of every path, keyed by the path
    gain: dict[tuple, float] = {}
    for r in range(1, n + 1):
        level = list(paths(r))
        if cfg.norm_pool == STEP_GLOBAL:
            pools = [level]
        else:
            by_prefix: dict[tuple, list] = {}
            for p in level:
                by_prefix.setdefault(p[:-1], []).append(p)
            pools = list(by_prefix.values())
        for pool in pools:
            for p, (_, _, c) in zip(pool, _contributions([components(p) for p in pool], cfg.alpha)):
                gain[p] = c

    best_key, best_path = None, None
    for p in paths(n):
        total = 0.0
        for r in range(1, n + 1):
            total += gain[p[:r]]
        key = (-total, tuple(f for f, _ in p), tuple(c for _, c in p))
        if best_key is None or key < best_key:
            best_key, best_path = key, p
    return PredictedSummary(video_id, best_path), -best_key[0] / n


def count_paths(frames_captions, n: int) -> int:
    """Number of complete length-``n`` paths."""
    choices = _normalize_choices(frames_captions)
    return sum(math.prod(len(c) for _, c in combo) for combo in itertools.combinations(choices, n))


def choices_from_candidates(cands: Sequence[Candidate]) -> dict[int, list[str]]:
    """Group candidate captions by keyframe, keeping first-seen order and dropping repeats."""
    out: dict[int, list[str]] = {}
    for c in cands:
        caps = out.setdefault(c.keyframe, [])
        if c.caption not in caps:
            caps.append(c.caption)
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# Scorers
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _text_id(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")


class HashScorer:
    """Deterministic pseudo-likelihoods in [-10, 0] for tests and demos.

    Outputs depend on the seed, the prefix frame indices and the candidate
    frame and caption, so the scorer is prefix-sensitive yet reproducible
    across runs and platforms.
    """

    prefix_sensitive = True

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64

    def _state(self, prefix, frame, caption) -> int:
        h = _splitmix64(self.seed)
        for f, _ in prefix:
            h = _splitmix64(h ^ (int(f) & _MASK64))
        h = _splitmix64(h ^ 0xF00D ^ (int(frame) & _MASK64))
        return _splitmix64(h ^ _text_id(caption))

    @staticmethod
    def _to_range(h: int) -> float:
        return -10.0 * ((h >> 11) / float(1 << 53))

    def score_components(self, prefix, cand_frame, cand_caption):
        h = self._state(prefix, cand_frame, cand_caption)
        return self._to_range(h), self._to_range(_splitmix64(h ^ 0xCAFE))


def hash_scorer(seed: int) -> HashScorer:
    return HashScorer(seed)


class TableScorer:
    """Context-free likelihoods looked up by ``(frame, caption_id)``.

    ``caption_id`` is the position of the caption within its frame's
    candidate list, as given by ``captions_by_frame``.
    """

    prefix_sensitive = False

    def __init__(self, table: Mapping[tuple[int, int], tuple[float, float]], captions_by_frame=None):
        self.table = dict(table)
        self._ids = {}
        if captions_by_frame is not None:
            for f, caps in _normalize_choices(captions_by_frame):
                for k, cap in enumerate(caps):
                    self._ids[(f, cap)] = k

    def caption_id(self, frame: int, caption: str) -> int:
        try:
            return self._ids[(frame, caption)]
        except KeyError:
            raise KeyError(f"caption {caption!r} is not a candidate of frame {frame}") from None

    def score_components(self, prefix, cand_frame, cand_caption):
        key = (int(cand_frame), self.caption_id(int(cand_frame), cand_caption))
        try:
            return self.table[key]
        except KeyError:
            raise KeyError(f"no scorer table entry for frame={key[0]} caption_id={key[1]}") from None


def load_score_table(path, video_id: str | None = None) -> dict[tuple[int, int], tuple[float, float]]:
    """Read scorer-table JSONL; rows carrying another ``video_id`` are skipped."""
    table = {}
    for lineno, obj in _iter_jsonl(path):
        if video_id is not None and "video_id" in obj and str(obj["video_id"]) != video_id:
            continue
        try:
            key = (int(obj["frame"]), int(obj["caption_id"]))
            table[key] = (float(obj["frame_ll"]), float(obj["caption_ll"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad scorer table row ({exc})") from exc
    return table


def table_scorer(path, captions_by_frame, video_id: str | None = None) -> TableScorer:
    return TableScorer(load_score_table(path, video_id), captions_by_frame)
