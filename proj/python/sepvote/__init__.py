"""Sepsis prediction ensemble toolkit: labeling, utility scoring, diversity
measures, tree edit distance, and consensus voting over hourly prediction
streams."""

from ._core import (
    SepvoteError,
    __version__,
    fleiss_kappa,
    hourly_utility,
    label_hours,
    majority_vote,
    normalized_score,
    synth_cohort,
    tree_edit_distance,
    unweighted_similarity,
    weighted_similarity,
)

__all__ = [
    "SepvoteError",
    "__version__",
    "fleiss_kappa",
    "hourly_utility",
    "label_hours",
    "majority_vote",
    "normalized_score",
    "synth_cohort",
    "tree_edit_distance",
    "unweighted_similarity",
    "weighted_similarity",
]
