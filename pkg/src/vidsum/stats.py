"""Corpus statistics: videos, captions per video, keyframes per caption, words per caption."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import VidsumError

WORD_TOKENIZER = "whitespace"


@dataclass(frozen=True)
class DatasetStats:
    num_videos: int
    avg_keyframes_per_caption: float
    avg_captions_per_video: float
    avg_words_per_caption: float
    num_captions: int = 0
    num_keyframes: int = 0
    num_words: int = 0
    tokenizer: str = WORD_TOKENIZER

    def to_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        rows = [
            ("Number of videos", f"{self.num_videos:,}"),
            ("Average number of keyframes per caption", f"{self.avg_keyframes_per_caption:.2f}"),
            ("Average number of captions per video", f"{self.avg_captions_per_video:.2f}"),
            ("Average number of words per caption", f"{self.avg_words_per_caption:.2f}"),
            ("Word tokenizer", self.tokenizer),
        ]
        w0 = max(len(r[0]) for r in rows)
        w1 = max(len(r[1]) for r in rows)
        return "\n".join(f"{a:<{w0}}  {b:>{w1}}" for a, b in rows) + "\n"


def compute_stats(records) -> DatasetStats:
    records = list(records)
    if not records:
        raise VidsumError("cannot compute statistics of an empty dataset")
    captions = keyframes = words = 0
    for rec in records:
        for slot in rec.references:
            captions += 1
            keyframes += len(slot.keyframes)
            words += len(slot.caption.split())
    return DatasetStats(
        num_videos=len(records),
        avg_keyframes_per_caption=keyframes / captions,
        avg_captions_per_video=captions / len(records),
        avg_words_per_caption=words / captions,
        num_captions=captions,
        num_keyframes=keyframes,
        num_words=words,
    )
