"""
Corpus statistics
=================

Counts of videos, keyframes per caption, captions per video and words per
caption, as printed by ``vidsum stats``.
"""

from vidsum import ReferenceSlot, VideoRecord
from vidsum.stats import compute_stats

records = [
    VideoRecord("a", 10.0, 20, (ReferenceSlot("a man rides a bike", (1, 2, 3)), ReferenceSlot("he falls", (12,)))),
    VideoRecord(
        "b",
        8.0,
        16,
        (
            ReferenceSlot("rain starts", (0, 1)),
            ReferenceSlot("people open umbrellas", (5, 6, 7, 8)),
            ReferenceSlot("the street empties", (14,)),
        ),
    ),
]
stats = compute_stats(records)
print(stats.table())
print(stats.to_dict())
