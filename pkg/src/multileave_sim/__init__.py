"""Simulation lab for multileaved ranker comparison with click feedback."""

from .core import (
    MultileavedList,
    RankedList,
    matrix_from_scores,
    preferences_from_credits,
    running_mean_update,
)
from .multileaving import (
    MultileaveConfig,
    pm_credits_exact,
    pm_credits_sampled,
    pm_doc_probability,
    pm_multileave,
    sosm_credits,
    sosm_multileave,
    tdm_credits,
    team_draft_multileave,
)
from .clicks import ClickModelParams, DEFAULT_CLICK_MODELS, random_clicks, simulate_clicks
from .dataset import (
    Dataset,
    FeatureRanker,
    feature_ranking,
    ground_truth_matrix,
    ndcg_at_k,
    parse_letor,
    serialize_letor,
    split_queries,
    synthesize_dataset,
)
from .harness import (
    ExperimentConfig,
    bias_error_rate,
    error_rate,
    run_experiment,
    write_csv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
