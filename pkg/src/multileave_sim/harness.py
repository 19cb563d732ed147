"""Experiment orchestration: multileaved comparisons against NDCG truth.

A run samples k feature rankers, fixes a ground-truth preference matrix
from mean NDCG@10 on held-out queries, then repeatedly samples a
training query, multileaves it with every configured method, simulates
clicks and folds the inferred preferences into each method's running
mean. The error of the running mean against the truth (or, in bias
mode, its deviation from the all-ties matrix) is logged on a grid of
iterations, alongside an incremental-NDCG baseline computed from the
distinct training queries seen so far.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import multileaving as ml_ops
from .clicks import DEFAULT_CLICK_MODELS, ClickModelParams, random_clicks, simulate_clicks
from .core import (
    MultileavedList,
    RankedList,
    matrix_from_scores,
    preferences_from_credits,
    running_mean_update,
)
from .dataset import (
    Dataset,
    FeatureRanker,
    feature_ranking,
    ground_truth_matrix,
    ndcg_at_k,
    parse_letor,
    split_queries,
    synthesize_dataset,
)
from .multileaving import MultileaveConfig

METHODS = ("tdm", "pm", "sosm")
BASELINE_METHOD = "ndcg-baseline"

# RNG stream purposes for the counter-based seed derivation.
_ROLE_RANKERS = 0
_ROLE_QUERIES = 1
_ROLE_CONSTRUCT = 2
_ROLE_CLICKS = 3
_ROLE_CREDITS = 4


@dataclass
class ExperimentConfig:
    dataset_path: Optional[str] = None
    synthetic: Optional[Tuple[int, int, int]] = None  # queries, docs, features
    methods: Tuple[str, ...] = METHODS
    rankers: int = 5
    iterations: int = 1000
    runs: int = 1
    click_model: str = "navigational"
    multileave: MultileaveConfig = field(default_factory=MultileaveConfig)
    train_fraction: float = 0.5
    bias: bool = False
    bias_epsilon: float = 0.03
    seed: int = 0
    out: Optional[str] = None
    click_models: Dict[str, ClickModelParams] = field(
        default_factory=lambda: dict(DEFAULT_CLICK_MODELS)
    )

    def __post_init__(self) -> None:
        if self.rankers < 2:
            raise ValueError("need at least two rankers")
        if self.iterations < 1 or self.runs < 1:
            raise ValueError("iterations and runs must be >= 1")
        if self.bias_epsilon <= 0.0:
            raise ValueError("bias epsilon must be positive")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.click_model not in self.click_models:
            raise ValueError(f"unknown click model {self.click_model!r}")


# One logged error curve per (run, method), iterations strictly increasing.
Curves = Dict[Tuple[int, str], List[Tuple[int, float]]]


def error_rate(mean_m: np.ndarray, truth_p: np.ndarray) -> float:
    """Fraction of ordered ranker pairs whose inferred sign disagrees.

    A tie on one side against a strict preference on the other counts as
    an error; the diagonal is excluded.
    """
    if mean_m.shape != truth_p.shape:
        raise ValueError("matrix dimension mismatch")
    k = mean_m.shape[0]
    mism = np.sign(mean_m - 0.5) != np.sign(truth_p - 0.5)
    np.fill_diagonal(mism, False)
    return float(mism.sum()) / (k * (k - 1))


def bias_error_rate(mean_m: np.ndarray, epsilon: float = 0.03) -> float:
    """Fraction of ordered off-diagonal pairs deviating from 0.5 by > epsilon."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    k = mean_m.shape[0]
    dev = np.abs(mean_m - 0.5) > epsilon
    np.fill_diagonal(dev, False)
    return float(dev.sum()) / (k * (k - 1))


def log_points(iterations: int) -> List[int]:
    """Every iteration up to 100, then every 100th, always including the last."""
    points = set(range(1, min(iterations, 100) + 1))
    points.update(range(100, iterations + 1, 100))
    points.add(iterations)
    return sorted(points)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def load_dataset(config: ExperimentConfig) -> Dataset:
    if (config.dataset_path is None) == (config.synthetic is None):
        raise ValueError("exactly one of dataset_path or synthetic must be set")
    if config.dataset_path is not None:
        with open(config.dataset_path) as fh:
            return parse_letor(fh)
    q, d, f = config.synthetic
    return synthesize_dataset(q, d, f, seed=config.seed)


class _RunState:
    """Caches shared by one run: rankings and per-query NDCG per ranker."""

    def __init__(self, ds: Dataset, rankers: Sequence[FeatureRanker]):
        self.ds = ds
        self.rankers = rankers
        self._rankings: Dict[Tuple[int, int], RankedList] = {}
        self._ndcg: Dict[int, np.ndarray] = {}
        self._grades: Dict[int, Dict[int, int]] = {}

    def rankings(self, qid: int) -> List[RankedList]:
        out = []
        for r in self.rankers:
            key = (qid, r.feature)
            if key not in self._rankings:
                self._rankings[key] = feature_ranking(self.ds, qid, r)
            out.append(self._rankings[key])
        return out

    def ndcg_vector(self, qid: int) -> np.ndarray:
        if qid not in self._ndcg:
            grades = self.ds.queries[qid].grades
            self._ndcg[qid] = np.array(
                [ndcg_at_k(rk, grades) for rk in self.rankings(qid)]
            )
        return self._ndcg[qid]

    def grades(self, qid: int) -> Dict[int, int]:
        if qid not in self._grades:
            self._grades[qid] = {
                i: int(g) for i, g in enumerate(self.ds.queries[qid].grades)
            }
        return self._grades[qid]


def _construct(
    method: str,
    rankings: Sequence[RankedList],
    cfg: MultileaveConfig,
    rng: np.random.Generator,
) -> MultileavedList:
    if method == "pm":
        return ml_ops.pm_multileave(rankings, cfg, rng)
    return ml_ops.team_draft_multileave(rankings, cfg, rng)


def _credits(
    method: str,
    rankings: Sequence[RankedList],
    ml: MultileavedList,
    clicks,
    cfg: MultileaveConfig,
    credit_rng: np.random.Generator,
) -> np.ndarray:
    if method == "tdm":
        return ml_ops.tdm_credits(ml, clicks, len(rankings))
    if method == "sosm":
        return ml_ops.sosm_credits(rankings, ml, clicks, cfg.exponent)
    if cfg.pm_mode == "sampled":
        return ml_ops.pm_credits_sampled(
            rankings, ml, clicks, cfg.pm_samples, credit_rng, cfg.exponent
        )
    return ml_ops.pm_credits_exact(rankings, ml, clicks, cfg.exponent)


def run_experiment(config: ExperimentConfig, ds: Optional[Dataset] = None) -> Curves:
    """Execute all runs and return logged error curves per (run, method)."""
    if ds is None:
        ds = load_dataset(config)
    if config.rankers > ds.num_features:
        raise ValueError(
            f"cannot sample {config.rankers} rankers from {ds.num_features} features"
        )
    split = split_queries(ds, config.train_fraction, config.seed)
    params = config.click_models[config.click_model]
    points = log_points(config.iterations)
    methods = list(config.methods)
    curves: Curves = {}

    for run in range(config.runs):
        ranker_rng = _rng(config.seed, _ROLE_RANKERS, run, 0)
        features = sorted(
            int(f)
            for f in ranker_rng.choice(ds.num_features, config.rankers, replace=False)
        )
        rankers = [FeatureRanker(f) for f in features]
        state = _RunState(ds, rankers)
        truth = (
            None
            if config.bias
            else ground_truth_matrix(ds, rankers, list(split.test))
        )
        query_rng = _rng(config.seed, _ROLE_QUERIES, run, 0)
        cons_rngs = {
            m: _rng(config.seed, _ROLE_CONSTRUCT, run, i)
            for i, m in enumerate(methods)
        }
        click_rngs = {
            m: _rng(config.seed, _ROLE_CLICKS, run, i) for i, m in enumerate(methods)
        }
        credit_rngs = {
            m: _rng(config.seed, _ROLE_CREDITS, run, i) for i, m in enumerate(methods)
        }
        k = config.rankers
        means = {m: np.full((k, k), 0.5) for m in methods}
        for m in methods:
            curves[(run, m)] = []
        curves[(run, BASELINE_METHOD)] = []
        seen_qids: set = set()
        ndcg_sum = np.zeros(k)
        train = list(split.train)
        point_idx = 0

        for t in range(1, config.iterations + 1):
            qid = train[int(query_rng.integers(len(train)))]
            if qid not in seen_qids:
                seen_qids.add(qid)
                ndcg_sum += state.ndcg_vector(qid)
            rankings = state.rankings(qid)
            relevance = state.grades(qid)
            for m in methods:
                ml = _construct(m, rankings, config.multileave, cons_rngs[m])
                if params.name == "random":
                    clicks = random_clicks(ml, params.p_click[0], click_rngs[m])
                else:
                    clicks = simulate_clicks(ml, relevance, params, click_rngs[m])
                credits = _credits(
                    m, rankings, ml, clicks, config.multileave, credit_rngs[m]
                )
                sample = preferences_from_credits(credits)
                means[m] = running_mean_update(means[m], sample, t)
            if point_idx < len(points) and t == points[point_idx]:
                point_idx += 1
                baseline = matrix_from_scores(ndcg_sum / len(seen_qids))
                for m in methods:
                    err = (
                        bias_error_rate(means[m], config.bias_epsilon)
                        if config.bias
                        else error_rate(means[m], truth)
                    )
                    curves[(run, m)].append((t, err))
                base_err = (
                    bias_error_rate(baseline, config.bias_epsilon)
                    if config.bias
                    else error_rate(baseline, truth)
                )
                curves[(run, BASELINE_METHOD)].append((t, base_err))
    return curves


def write_csv(curves: Curves, path: str) -> None:
    """Write `run,method,iteration,error` rows, sorted, 6 decimal places."""
    if not curves:
        raise ValueError("no curves to write")
    rows = []
    for (run, method), series in curves.items():
        for t, err in series:
            rows.append((run, method, t, err))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    with open(path, "w", newline="") as fh:
        fh.write("run,method,iteration,error\n")
        for run, method, t, err in rows:
            fh.write(f"{run},{method},{t},{err:.6f}\n")
