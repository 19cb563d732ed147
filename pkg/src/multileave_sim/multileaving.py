"""Multileaved list construction and credit inference.

Three methods are provided:

* team-draft: round-based drafting, clicks credit the contributing team;
* probabilistic: rank-softmax sampling during construction, credit by
  marginalizing over the document-to-ranker assignments that could have
  produced the list (exact or Monte Carlo);
* sample-only scored: team-draft construction, credit from how each
  ranker orders only the presented sample.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence

import numpy as np

from .core import MultileavedList, RankedList, validate_clicks

SOFTMAX_EXPONENT = 3  # inverse-cube rank weighting


@dataclass(frozen=True)
class MultileaveConfig:
    """Shared construction/credit parameters."""

    length: int = 10
    exponent: int = SOFTMAX_EXPONENT
    pm_mode: str = "exact"  # "exact" | "sampled"
    pm_samples: int = 10_000

    def __post_init__(self) -> None:
        if self.length < 1:
            raise ValueError("presentation length must be >= 1")
        if self.pm_mode not in ("exact", "sampled"):
            raise ValueError(f"unknown pm credit mode: {self.pm_mode}")
        if self.pm_samples < 1:
            raise ValueError("sample count must be >= 1")


def _inv_powers(n: int, exponent: int) -> np.ndarray:
    return 1.0 / np.arange(1, n + 1, dtype=float) ** exponent


@lru_cache(maxsize=4096)
def _pos_map(ranking: RankedList) -> Dict[int, int]:
    return {d: i for i, d in enumerate(ranking.docs)}


def _check_rankings(rankings: Sequence[RankedList]) -> int:
    if len(rankings) < 2:
        raise ValueError("need at least two rankers to multileave")
    qids = {r.query_id for r in rankings}
    if len(qids) > 1:
        raise ValueError("all rankings must belong to the same query")
    pool = set()
    for r in rankings:
        pool.update(r.docs)
    if not pool:
        raise ValueError("all rankings are empty")
    return len(pool)


def team_draft_multileave(
    rankings: Sequence[RankedList],
    config: MultileaveConfig,
    rng: np.random.Generator,
) -> MultileavedList:
    """Draft documents in rounds with a fresh random ranker order per round.

    Each ranker in turn contributes its best not-yet-shown document and
    labels it with its team; rankers whose lists are exhausted are
    skipped for the round.
    """
    pool_size = _check_rankings(rankings)
    target = min(config.length, pool_size)
    k = len(rankings)
    docs: List[int] = []
    teams: List[int] = []
    used: set = set()
    pointers = [0] * k
    while len(docs) < target:
        for j in rng.permutation(k):
            seq = rankings[j].docs
            i = pointers[j]
            while i < len(seq) and seq[i] in used:
                i += 1
            pointers[j] = i
            if i == len(seq):
                continue
            used.add(seq[i])
            docs.append(seq[i])
            teams.append(int(j))
            if len(docs) == target:
                break
    return MultileavedList(tuple(docs), tuple(teams))


def tdm_credits(ml: MultileavedList, clicks, num_rankers: int) -> np.ndarray:
    """Count clicks per team."""
    if ml.teams is None:
        raise ValueError("team-draft credit requires team labels")
    clicks = validate_clicks(clicks, len(ml))
    credits = np.zeros(num_rankers)
    for pos in clicks:
        credits[ml.teams[pos]] += 1.0
    return credits


def pm_doc_probability(
    ranking: RankedList,
    removed,
    doc: int,
    exponent: int = SOFTMAX_EXPONENT,
) -> float:
    """Probability of drawing `doc` from `ranking` given removed documents.

    Ranks are recomputed in the absence of the removed documents and
    weighted by 1/rank**exponent. A document the ranker never retrieved
    has probability 0.
    """
    removed = set(removed)
    if doc in removed:
        raise ValueError("document has already been removed")
    remaining = [d for d in ranking.docs if d not in removed]
    if not remaining:
        raise ValueError("ranking is empty after removal")
    try:
        rank = remaining.index(doc) + 1
    except ValueError:
        return 0.0
    weights = _inv_powers(len(remaining), exponent)
    return float(weights[rank - 1] / weights.sum())


def pm_multileave(
    rankings: Sequence[RankedList],
    config: MultileaveConfig,
    rng: np.random.Generator,
) -> MultileavedList:
    """Build the list in rounds, sampling each ranker's pick softmax-by-rank.

    A chosen document is removed from every ranker's remaining list and
    ranks are implicitly recomputed. No team labels are kept: credit
    inference marginalizes over provenance.
    """
    pool_size = _check_rankings(rankings)
    target = min(config.length, pool_size)
    k = len(rankings)
    max_len = max(len(r.docs) for r in rankings)
    inv = _inv_powers(max_len, config.exponent)
    remaining = [list(r.docs) for r in rankings]
    docs: List[int] = []
    while len(docs) < target:
        for j in rng.permutation(k):
            rem = remaining[j]
            if not rem:
                continue
            cum = np.cumsum(inv[: len(rem)])
            idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            doc = rem[min(idx, len(rem) - 1)]
            docs.append(doc)
            for other in remaining:
                try:
                    other.remove(doc)
                except ValueError:
                    pass
            if len(docs) == target:
                break
    return MultileavedList(tuple(docs), None)


def pm_team_posteriors(
    rankings: Sequence[RankedList],
    ml: MultileavedList,
    exponent: int = SOFTMAX_EXPONENT,
) -> np.ndarray:
    """Per-position posterior over which ranker contributed each document.

    Row r gives, for the document at position r, the probability each
    ranker was its source, conditioned on the preceding documents having
    been removed from all lists. The draw probability at a position
    depends only on the prefix, so positions are independent and the
    uniform ranker prior cancels in the normalization. If no ranker can
    produce the document the posterior is uniform.
    """
    k = len(rankings)
    length = len(ml)
    probs = np.zeros((length, k))
    for j, ranking in enumerate(rankings):
        pos_of = _pos_map(ranking)
        n_docs = len(ranking.docs)
        inv = _inv_powers(n_docs, exponent) if n_docs else np.empty(0)
        cum = np.cumsum(inv)
        taken: List[int] = []  # sorted original indices of removed docs
        for r, doc in enumerate(ml.docs):
            i = pos_of.get(doc)
            if i is not None:
                n_rem = n_docs - len(taken)
                rank = i + 1 - bisect.bisect_left(taken, i)
                probs[r, j] = inv[rank - 1] / cum[n_rem - 1]
                bisect.insort(taken, i)
    sums = probs.sum(axis=1, keepdims=True)
    uniform = sums == 0.0
    sums[uniform] = 1.0
    posteriors = probs / sums
    posteriors[uniform[:, 0]] = 1.0 / k
    return posteriors


def pm_credits_exact(
    rankings: Sequence[RankedList],
    ml: MultileavedList,
    clicks,
    exponent: int = SOFTMAX_EXPONENT,
) -> np.ndarray:
    """Assignment-marginal credit, computed in closed form.

    Equals the brute-force sum over all k**L assignments weighted by
    their probability, rescaled so credits sum to the click count.
    """
    if len(ml) == 0:
        raise ValueError("multileaved list is empty")
    clicks = validate_clicks(clicks, len(ml))
    posteriors = pm_team_posteriors(rankings, ml, exponent)
    credits = np.zeros(len(rankings))
    for pos in clicks:
        credits += posteriors[pos]
    return credits


def pm_credits_sampled(
    rankings: Sequence[RankedList],
    ml: MultileavedList,
    clicks,
    sample_count: int,
    rng: np.random.Generator,
    exponent: int = SOFTMAX_EXPONENT,
) -> np.ndarray:
    """Monte Carlo estimate of the assignment-marginal credit.

    Samples whole assignments position-by-position from the team
    posteriors and averages the per-ranker clicked-document counts,
    scaled to sum to the click count. Converges to the exact credit as
    the sample count grows.
    """
    if sample_count < 1:
        raise ValueError("sample count must be >= 1")
    if len(ml) == 0:
        raise ValueError("multileaved list is empty")
    clicks = validate_clicks(clicks, len(ml))
    posteriors = pm_team_posteriors(rankings, ml, exponent)
    credits = np.zeros(len(rankings))
    for pos in clicks:
        counts = rng.multinomial(sample_count, posteriors[pos])
        credits += counts / sample_count
    total = credits.sum()
    if total > 0.0:
        credits *= len(clicks) / total
    return credits


sosm_multileave = team_draft_multileave  # construction is shared


def sosm_credits(
    rankings: Sequence[RankedList],
    ml: MultileavedList,
    clicks,
    exponent: int = SOFTMAX_EXPONENT,
) -> np.ndarray:
    """Credit each ranker by how it orders the presented sample only.

    Each ranker re-ranks the multileaved documents by its original
    preference; documents it never retrieved go after all retrieved
    ones, in presentation order. A clicked document contributes its
    softmax-by-rank score, normalized over the sample, so every ranker's
    scores over the sample sum to 1.
    """
    m = len(ml)
    if m == 0:
        raise ValueError("multileaved list is empty")
    clicks = validate_clicks(clicks, m)
    inv = _inv_powers(m, exponent)
    denom = inv.sum()
    credits = np.zeros(len(rankings))
    for j, ranking in enumerate(rankings):
        pos_of = _pos_map(ranking)
        order = sorted(
            range(m),
            key=lambda t: (0, pos_of[ml.docs[t]]) if ml.docs[t] in pos_of else (1, t),
        )
        score_at = np.empty(m)
        for sample_rank, ml_idx in enumerate(order):
            score_at[ml_idx] = inv[sample_rank] / denom
        credits[j] = sum(score_at[pos] for pos in clicks)
    return credits


def sosm_sample_scores(
    ranking: RankedList, ml: MultileavedList, exponent: int = SOFTMAX_EXPONENT
) -> Dict[int, float]:
    """Per-document sample-only scores for one ranker (sums to 1)."""
    m = len(ml)
    inv = _inv_powers(m, exponent)
    denom = inv.sum()
    pos_of = {d: i for i, d in enumerate(ranking.docs)}
    order = sorted(
        range(m),
        key=lambda t: (0, pos_of[ml.docs[t]]) if ml.docs[t] in pos_of else (1, t),
    )
    return {ml.docs[ml_idx]: inv[r] / denom for r, ml_idx in enumerate(order)}
