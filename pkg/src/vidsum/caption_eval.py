"""Caption evaluation on top of the AKM alignment.

Predictions are aligned to reference slots with the cosine AKM matcher; the
aligned reference captions then serve as references for METEOR and for any
externally computed neural scores (e.g. BLEURT), which are ingested from
JSONL rather than computed here.
"""

from __future__ import annotations

import logging
import math
import string
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .akm import COSINE, EXACT, akm_align, akm_score_matrix, match_exact
from .core import PredictedSummary, ReferenceSlot, VideoRecord, _iter_jsonl
from .errors import FormatError, VidsumError
from .features import FeatureMatrix

logger = logging.getLogger(__name__)

TOKENIZER = "lowercase+strip-ascii-punct+whitespace"
_PUNCT = str.maketrans("", "", string.punctuation)

# Above this many search nodes the chunk search returns its best-so-far.
CHUNK_SEARCH_BUDGET = 200_000


def tokenize(text: str) -> list[str]:
    return text.lower().translate(_PUNCT).split()


@dataclass(frozen=True)
class MeteorResult:
    score: float
    matches: int
    chunks: int
    precision: float
    recall: float
    empty_input: bool = False


def _min_chunk_alignment(cand: list[str], ref: list[str]) -> tuple[int, int]:
    """Size and chunk count of the chunk-minimal maximum exact matching.

    Candidate tokens are visited left to right and reference positions are
    tried in increasing order, so among alignments with the fewest chunks the
    first one found pairs words as far left as possible.
    """
    ref_pos: dict[str, list[int]] = defaultdict(list)
    for k, w in enumerate(ref):
        ref_pos[w].append(k)
    cc = Counter(cand)
    need = {w: min(cc[w], len(ref_pos[w])) for w in cc}
    m = sum(need.values())
    if m == 0:
        return 0, 0

    # occurrences of each word still ahead, to know when skipping is allowed
    remaining_after = []
    seen: Counter = Counter()
    for w in reversed(cand):
        remaining_after.append(seen[w])
        seen[w] += 1
    remaining_after.reverse()

    used = [False] * len(ref)
    left = dict(need)
    best = [math.inf]
    nodes = [0]

    def dfs(i: int, prev: int, chunks: int) -> None:
        # prev: ref position matched by candidate token i-1, or -2 if unmatched
        if chunks >= best[0] or nodes[0] > CHUNK_SEARCH_BUDGET:
            return
        nodes[0] += 1
        if i == len(cand):
            best[0] = chunks
            return
        w = cand[i]
        if left.get(w, 0) > 0:
            left[w] -= 1
            for k in ref_pos[w]:
                if used[k]:
                    continue
                used[k] = True
                dfs(i + 1, k, chunks + (0 if k == prev + 1 and prev >= 0 else 1))
                used[k] = False
            left[w] += 1
        if left.get(w, 0) <= remaining_after[i]:
            dfs(i + 1, -2, chunks)

    dfs(0, -2, 0)
    if nodes[0] > CHUNK_SEARCH_BUDGET:
        logger.warning("chunk search budget exhausted; using best alignment found")
    return m, int(best[0])


def meteor_exact_detail(candidate: str, reference: str) -> MeteorResult:
    cand, ref = tokenize(candidate), tokenize(reference)
    if not cand or not ref:
        logger.warning("empty candidate or reference after tokenization; METEOR = 0")
        return MeteorResult(0.0, 0, 0, 0.0, 0.0, empty_input=True)
    m, chunks = _min_chunk_alignment(cand, ref)
    if m == 0:
        return MeteorResult(0.0, 0, 0, 0.0, 0.0)
    p = m / len(cand)
    r = m / len(ref)
    fmean = 10 * p * r / (r + 9 * p)
    penalty = 0.5 * (chunks / m) ** 3
    return MeteorResult(fmean * (1 - penalty), m, chunks, p, r)


def meteor_exact(candidate: str, reference: str) -> float:
    """METEOR restricted to exact unigram matches.

    >>> round(meteor_exact("a b c", "a b c"), 5)
    0.98148
    """
    return meteor_exact_detail(candidate, reference).score


def select_references(
    pred: PredictedSummary, refs: VideoRecord, fm: FeatureMatrix
) -> list[ReferenceSlot]:
    """Reference slots chosen for each prediction by the cosine alignment."""
    align = akm_align(akm_score_matrix(pred, refs, COSINE, fm))
    return [refs.references[j] for j in align.assign]


@dataclass
class EvalReport:
    video_id: str
    akm_ex: float
    akm_cos: float
    aligned_akm_ex: float
    meteor: float
    assign: tuple[int, ...]
    external: dict[str, float] = field(default_factory=dict)

    def metrics(self) -> dict[str, float]:
        out = {
            "akm_ex": self.akm_ex,
            "akm_cos": self.akm_cos,
            "aligned_akm_ex": self.aligned_akm_ex,
            "meteor": self.meteor,
        }
        out.update(self.external)
        return out

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "akm_ex": self.akm_ex,
            "akm_cos": self.akm_cos,
            "aligned_akm_ex": self.aligned_akm_ex,
            "meteor": self.meteor,
            "external": dict(sorted(self.external.items())),
            "assign": list(self.assign),
        }


# (video_id, pair_index) -> {metric: value}
ExternalScores = dict[tuple[str, int], dict[str, float]]


def load_external_scores(path) -> ExternalScores:
    out: ExternalScores = defaultdict(dict)
    for lineno, obj in _iter_jsonl(path):
        try:
            key = (str(obj["video_id"]), int(obj["pair_index"]))
            out[key][str(obj["metric"])] = float(obj["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}:{lineno}: bad external score record ({exc})") from exc
    return dict(out)


def _external_means(video_id: str, n: int, external: ExternalScores | None) -> dict[str, float]:
    if not external:
        return {}
    per_pair = [external.get((video_id, i), {}) for i in range(n)]
    names = set().union(*per_pair)
    out = {}
    for name in sorted(names):
        vals = [p[name] for p in per_pair if name in p]
        if len(vals) < n:
            logger.warning("%s: metric %r missing for some pairs; omitted", video_id, name)
            continue
        out[name] = math.fsum(vals) / n
    return out


def evaluate_summary(
    pred: PredictedSummary,
    refs: VideoRecord,
    fm: FeatureMatrix,
    external_scores: ExternalScores | None = None,
) -> EvalReport:
    """Score one predicted summary against its video's references.

    ``akm_ex`` is the standalone exact-match optimum; ``aligned_akm_ex``
    re-scores the exact matches along the cosine alignment that also selects
    the reference captions for METEOR.
    """
    ex = akm_align(akm_score_matrix(pred, refs, EXACT))
    cos = akm_align(akm_score_matrix(pred, refs, COSINE, fm))
    slots = [refs.references[j] for j in cos.assign]
    aligned_ex = sum(match_exact(f, s) for f, s in zip(pred.frames, slots)) / pred.N
    meteor = math.fsum(meteor_exact(c, s.caption) for c, s in zip(pred.captions, slots)) / pred.N
    return EvalReport(
        video_id=pred.video_id,
        akm_ex=ex.score,
        akm_cos=cos.score,
        aligned_akm_ex=aligned_ex,
        meteor=meteor,
        assign=cos.assign,
        external=_external_means(pred.video_id, pred.N, external_scores),
    )


@dataclass
class CorpusReport:
    num_videos: int
    means: dict[str, float]
    counts: dict[str, int]

    def to_dict(self) -> dict:
        return {"num_videos": self.num_videos, "means": self.means, "counts": self.counts}


def aggregate(reports) -> CorpusReport:
    """Unweighted per-video mean of every metric, with per-metric counts."""
    reports = list(reports)
    if not reports:
        raise VidsumError("cannot aggregate an empty report list")
    values: dict[str, list[float]] = {}
    for r in reports:
        for name, v in r.metrics().items():
            values.setdefault(name, []).append(v)
    means = {k: math.fsum(v) / len(v) for k, v in values.items()}
    counts = {k: len(v) for k, v in values.items()}
    return CorpusReport(len(reports), means, counts)
