"""Simulated users: cascade click models over multileaved lists.

A cascade user scans the presented list top to bottom, clicks a document
with a probability depending on its relevance grade, and after a click
may stop scanning. The random model clicks each position independently
of relevance and never stops.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Tuple

import numpy as np

from .core import MultileavedList


@dataclass(frozen=True)
class ClickModelParams:
    """Per-grade click and stop probabilities, indexed by relevance grade."""

    name: str
    p_click: Tuple[float, ...]
    p_stop: Tuple[float, ...]

    def __post_init__(self) -> None:
        for p in (*self.p_click, *self.p_stop):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        if len(self.p_click) != len(self.p_stop):
            raise ValueError("click and stop tables must have equal length")


# 5-grade defaults; fully overridable through the harness config file.
DEFAULT_CLICK_MODELS = {
    "perfect": ClickModelParams(
        "perfect", (0.0, 0.2, 0.4, 0.8, 1.0), (0.0, 0.0, 0.0, 0.0, 0.0)
    ),
    "navigational": ClickModelParams(
        "navigational", (0.05, 0.3, 0.5, 0.7, 0.95), (0.0, 0.2, 0.3, 0.4, 0.9)
    ),
    "informational": ClickModelParams(
        "informational", (0.4, 0.6, 0.7, 0.8, 0.9), (0.1, 0.2, 0.3, 0.4, 0.5)
    ),
    "random": ClickModelParams("random", (0.5,) * 5, (0.0,) * 5),
}


def simulate_clicks(
    ml: MultileavedList,
    relevance: Mapping[int, int],
    params: ClickModelParams,
    rng: np.random.Generator,
) -> frozenset:
    """Cascade scan: click by grade, then maybe stop.

    `relevance` maps each presented document to its grade; a missing
    grade is an error.
    """
    clicked = []
    for pos, doc in enumerate(ml.docs):
        if doc not in relevance:
            raise ValueError(f"no relevance grade for document {doc}")
        grade = int(relevance[doc])
        if not 0 <= grade < len(params.p_click):
            raise ValueError(f"grade {grade} outside click model table")
        if rng.random() < params.p_click[grade]:
            clicked.append(pos)
            if rng.random() < params.p_stop[grade]:
                break
    return frozenset(clicked)


def random_clicks(
    ml: MultileavedList, click_prob: float, rng: np.random.Generator
) -> frozenset:
    """Click each position independently with `click_prob`, never stop."""
    if not 0.0 <= click_prob <= 1.0:
        raise ValueError("click probability outside [0, 1]")
    draws = rng.random(len(ml.docs))
    return frozenset(int(i) for i in np.flatnonzero(draws < click_prob))
