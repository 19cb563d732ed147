"""Shared domain types and preference-matrix algebra.

Documents are plain integers, unique within a query. Credit vectors and
preference matrices are numpy arrays; a preference matrix M has
M[i, j] = 1 when ranker i beats ranker j, 0 when it loses and 0.5 for a
tie, with the diagonal fixed at 0.5.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class RankedList:
    """One ranker's ordered document list for a query, best first."""

    query_id: int
    docs: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(set(self.docs)) != len(self.docs):
            raise ValueError("ranked list contains duplicate documents")


@dataclass(frozen=True)
class MultileavedList:
    """Merged presentation list, optionally with per-document team labels.

    Team labels record which ranker contributed each document; they are
    present for team-draft style constructions and absent for
    probabilistic ones.
    """

    docs: Tuple[int, ...]
    teams: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if len(set(self.docs)) != len(self.docs):
            raise ValueError("multileaved list contains duplicate documents")
        if self.teams is not None and len(self.teams) != len(self.docs):
            raise ValueError("team labels must match list length")

    def __len__(self) -> int:
        return len(self.docs)


def validate_clicks(clicks, length: int) -> frozenset:
    """Check that clicked positions index into a list of `length`."""
    clicks = frozenset(int(c) for c in clicks)
    for c in clicks:
        if not 0 <= c < length:
            raise ValueError(f"clicked position {c} outside list of length {length}")
    return clicks


def preferences_from_credits(credits) -> np.ndarray:
    """Pairwise preference matrix from per-ranker credits.

    Credits are compared with exact floating-point equality: ties only
    arise from structurally identical inputs and must register as 0.5.
    """
    c = np.asarray(credits, dtype=float)
    if c.ndim != 1:
        raise ValueError("credits must be a 1-d vector")
    if not np.all(np.isfinite(c)):
        raise ValueError("credits must be finite")
    m = 0.5 + 0.5 * np.sign(c[:, None] - c[None, :])
    np.fill_diagonal(m, 0.5)
    return m


def running_mean_update(mean: np.ndarray, sample: np.ndarray, t: int) -> np.ndarray:
    """Fold the t-th sample matrix into the running mean over t samples."""
    if t < 1:
        raise ValueError("t must be >= 1")
    mean = np.asarray(mean, dtype=float)
    sample = np.asarray(sample, dtype=float)
    if mean.shape != sample.shape:
        raise ValueError("shape mismatch between mean and sample")
    return mean + (sample - mean) / t


def matrix_from_scores(scores, tol: float = 1e-12) -> np.ndarray:
    """Preference matrix from per-ranker scalar scores.

    Score differences within `tol` count as ties; used for ground-truth
    matrices built from mean quality metrics.
    """
    s = np.asarray(scores, dtype=float)
    d = s[:, None] - s[None, :]
    m = np.where(d > tol, 1.0, np.where(d < -tol, 0.0, 0.5))
    np.fill_diagonal(m, 0.5)
    return m
