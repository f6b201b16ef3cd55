"""Evaluation metrics and selection algorithms for multi-keyframe video summaries.

The package works on precomputed inputs only: per-frame features, candidate
tables and model likelihoods are read from files.
"""

__version__ = "0.1.0"

from .akm import (
    Alignment,
    ScoreMatrix,
    akm_align,
    akm_bruteforce,
    akm_cos,
    akm_ex,
    akm_score_matrix,
    match_cos,
    match_exact,
)
from .beam import BeamConfig, beam_select, exhaustive_select, hash_scorer, minmax_normalize, table_scorer
from .caption_eval import EvalReport, aggregate, evaluate_summary, meteor_exact, select_references
from .core import (
    Candidate,
    PredictedSummary,
    ReferenceSlot,
    VideoRecord,
    load_candidates,
    load_dataset,
    load_predictions,
    save_dataset,
)
from .errors import (
    CombinatorialLimitError,
    FormatError,
    InfeasibleError,
    ValidationError,
    VidsumError,
)
from .features import FeatureMatrix, FeatureStore, load_features, mean_center, save_features
from .filtering import FilterConfig, filter_dataset, filter_slot, slot_centroid
from .pseudo import PseudoConfig, gen_dataset, make_instance, split_spans
from .selector import SelectorConfig, prefilter, select_bruteforce, select_n_dp
from .stats import DatasetStats, compute_stats
