"""Shared test utilities: random instances and independent oracles."""
from __future__ import annotations

import itertools
from typing import List, Sequence, Set, Tuple

import numpy as np

from multileave_sim.core import MultileavedList, RankedList
from multileave_sim.multileaving import (
    MultileaveConfig,
    pm_doc_probability,
    pm_multileave,
)


def random_rankings(
    rng: np.random.Generator,
    num_rankers: int,
    universe: int,
    min_len: int = 1,
) -> List[RankedList]:
    """Random rankings over a shared document universe (possibly partial)."""
    rankings = []
    for _ in range(num_rankers):
        n = int(rng.integers(min_len, universe + 1))
        docs = rng.permutation(universe)[:n]
        rankings.append(RankedList(0, tuple(int(d) for d in docs)))
    return rankings


def random_pm_instance(
    rng: np.random.Generator,
    max_rankers: int = 4,
    max_length: int = 4,
    universe: int = 6,
) -> Tuple[List[RankedList], MultileavedList, Set[int]]:
    """Rankings, a PM-built multileaving over them, and a random click set."""
    k = int(rng.integers(2, max_rankers + 1))
    length = int(rng.integers(1, max_length + 1))
    rankings = random_rankings(rng, k, universe, min_len=2)
    cfg = MultileaveConfig(length=length)
    ml = pm_multileave(rankings, cfg, rng)
    clicks = {int(p) for p in range(len(ml)) if rng.random() < 0.5}
    return rankings, ml, clicks


def brute_force_pm_credits(
    rankings: Sequence[RankedList],
    ml: MultileavedList,
    clicks: Set[int],
    exponent: int = 3,
) -> np.ndarray:
    """Enumerate all k**L document-to-ranker assignments with their weights.

    Raw expected credit is rescaled so the entries sum to the click
    count, matching the production contract (a positive constant factor
    shared by all rankers cancels in preference inference).
    """
    k = len(rankings)
    length = len(ml.docs)
    raw = np.zeros(k)
    for assign in itertools.product(range(k), repeat=length):
        prob = (1.0 / k) ** length
        removed: Set[int] = set()
        for pos, doc in enumerate(ml.docs):
            try:
                prob *= pm_doc_probability(rankings[assign[pos]], removed, doc, exponent)
            except ValueError:  # ranking exhausted: cannot produce this doc
                prob = 0.0
            if prob == 0.0:
                break
            removed.add(doc)
        if prob == 0.0:
            continue
        for pos in clicks:
            raw[assign[pos]] += prob
    total = raw.sum()
    if total > 0.0:
        raw *= len(clicks) / total
    return raw


def cascade_click_marginals(grades, p_click, p_stop) -> np.ndarray:
    """Closed-form per-position click probability for the cascade model."""
    marginals = []
    survive = 1.0
    for g in grades:
        marginals.append(survive * p_click[g])
        survive *= 1.0 - p_click[g] * p_stop[g]
    return np.array(marginals)
