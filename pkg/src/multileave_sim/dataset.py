"""Learning-to-rank data: ingestion, feature rankers, NDCG ground truth.

Datasets use the standard SVMlight-style text format,
``<grade> qid:<id> <fid>:<value> ... [# comment]`` with 1-based feature
ids. Document ids are within-query ordinals (0-based, file order).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .core import RankedList, matrix_from_scores

NDCG_TIE_TOL = 1e-12


@dataclass
class QueryDocs:
    """All documents of one query: feature matrix rows align with grades."""

    features: np.ndarray  # (n_docs, num_features)
    grades: np.ndarray  # (n_docs,) ints


@dataclass
class Dataset:
    queries: Dict[int, QueryDocs]
    num_features: int
    max_grade: int = 4

    def query_ids(self) -> List[int]:
        return list(self.queries.keys())


@dataclass(frozen=True)
class FeatureRanker:
    """Ranks a query's documents by one feature column, descending."""

    feature: int


@dataclass(frozen=True)
class QuerySplit:
    train: Tuple[int, ...]
    test: Tuple[int, ...]


def parse_letor(lines: Iterable[str], max_grade: int = 4) -> Dataset:
    """Parse SVMlight/LETOR lines into a Dataset.

    Features absent from a line default to 0. Malformed lines report
    their 1-based line number.
    """
    raw: Dict[int, List[Tuple[int, Dict[int, float]]]] = {}
    order: List[int] = []
    num_features = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            grade = int(parts[0])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer relevance grade")
        if not 0 <= grade <= max_grade:
            raise ValueError(f"line {lineno}: grade {grade} outside 0..{max_grade}")
        if len(parts) < 2 or not parts[1].startswith("qid:"):
            raise ValueError(f"line {lineno}: missing qid field")
        try:
            qid = int(parts[1][4:])
        except ValueError:
            raise ValueError(f"line {lineno}: malformed qid")
        feats: Dict[int, float] = {}
        for tok in parts[2:]:
            try:
                fid_s, val_s = tok.split(":", 1)
                fid = int(fid_s)
                val = float(val_s)
            except ValueError:
                raise ValueError(f"line {lineno}: malformed feature token {tok!r}")
            if fid < 1:
                raise ValueError(f"line {lineno}: feature ids are 1-based")
            feats[fid] = val
            num_features = max(num_features, fid)
        if qid not in raw:
            raw[qid] = []
            order.append(qid)
        raw[qid].append((grade, feats))
    if not raw:
        raise ValueError("no queries in input")
    queries: Dict[int, QueryDocs] = {}
    for qid in order:
        rows = raw[qid]
        feats = np.zeros((len(rows), num_features))
        grades = np.zeros(len(rows), dtype=int)
        for i, (grade, fdict) in enumerate(rows):
            grades[i] = grade
            for fid, val in fdict.items():
                feats[i, fid - 1] = val
        queries[qid] = QueryDocs(feats, grades)
    return Dataset(queries, num_features, max_grade)


def serialize_letor(ds: Dataset) -> str:
    """Inverse of parse_letor; feature values written at full precision."""
    out: List[str] = []
    for qid, q in ds.queries.items():
        for i in range(len(q.grades)):
            toks = [str(int(q.grades[i])), f"qid:{qid}"]
            toks += [
                f"{f + 1}:{float(q.features[i, f])!r}" for f in range(ds.num_features)
            ]
            out.append(" ".join(toks))
    return "\n".join(out) + "\n"


def feature_ranking(ds: Dataset, qid: int, ranker: FeatureRanker) -> RankedList:
    """Documents sorted by descending feature value, ties by ascending id."""
    if qid not in ds.queries:
        raise ValueError(f"unknown query {qid}")
    if not 0 <= ranker.feature < ds.num_features:
        raise ValueError(f"feature index {ranker.feature} out of range")
    values = ds.queries[qid].features[:, ranker.feature]
    order = np.argsort(-values, kind="stable")
    return RankedList(qid, tuple(int(i) for i in order))


def ndcg_at_k(ranking: RankedList, grades: Sequence[int], k: int = 10) -> float:
    """NDCG@k with gain 2**g - 1 and log2(i + 1) discount.

    `grades` is indexed by document id. Queries whose ideal DCG is zero
    score 0.
    """
    gains = [2 ** int(grades[d]) - 1 for d in ranking.docs]
    ideal = sorted((2 ** int(g) - 1 for g in grades), reverse=True)
    dcg = sum(g / math.log2(i + 2) for i, g in enumerate(gains[:k]))
    idcg = sum(g / math.log2(i + 2) for i, g in enumerate(ideal[:k]))
    return dcg / idcg if idcg > 0.0 else 0.0


def mean_ndcg(
    ds: Dataset, ranker: FeatureRanker, qids: Sequence[int], k: int = 10
) -> float:
    """Mean NDCG@k of a feature ranker over the given queries."""
    if not qids:
        raise ValueError("empty query set")
    total = 0.0
    for qid in qids:
        ranking = feature_ranking(ds, qid, ranker)
        total += ndcg_at_k(ranking, ds.queries[qid].grades, k)
    return total / len(qids)


def ground_truth_matrix(
    ds: Dataset, rankers: Sequence[FeatureRanker], test_qids: Sequence[int]
) -> np.ndarray:
    """Pairwise preference matrix from mean NDCG@10 on the test queries."""
    if not test_qids:
        raise ValueError("empty test query set")
    scores = [mean_ndcg(ds, r, test_qids) for r in rankers]
    return matrix_from_scores(scores, NDCG_TIE_TOL)


def synthesize_dataset(
    num_queries: int,
    docs_per_query: int,
    num_features: int,
    seed: int,
    noise_scale: float = 1.0,
    max_cluster_size: int = 1,
    noise_correlation: float = 0.9,
) -> Dataset:
    """Random dataset with features of graded informativeness.

    Grades are uniform on 0..4; feature f is w_f * grade + Gaussian
    noise, with weights spread evenly over [0, 1] so the feature rankers
    span a spectrum of quality. Deterministic given the seed.

    With max_cluster_size > 1 the features are partitioned into
    variable-size clusters that share a weight and most of their noise
    (`noise_correlation` of the variance), giving groups of
    near-duplicate rankers like the redundant features of real
    learning-to-rank sets.
    """
    if min(num_queries, docs_per_query, num_features) < 1:
        raise ValueError("all counts must be >= 1")
    if max_cluster_size < 1:
        raise ValueError("max cluster size must be >= 1")
    rng = np.random.default_rng(seed)
    if max_cluster_size == 1:
        weights = (
            np.linspace(0.0, 1.0, num_features) if num_features > 1 else np.ones(1)
        )
        cluster_of = np.arange(num_features)
        rho = 0.0
    else:
        sizes: List[int] = []
        while sum(sizes) < num_features:
            sizes.append(int(rng.integers(1, max_cluster_size + 1)))
        sizes[-1] -= sum(sizes) - num_features
        cluster_w = rng.permutation(np.linspace(0.0, 1.0, len(sizes)))
        weights = np.concatenate([np.full(s, w) for s, w in zip(sizes, cluster_w)])
        cluster_of = np.concatenate(
            [np.full(s, i, dtype=int) for i, s in enumerate(sizes)]
        )
        rho = noise_correlation
    n_clusters = int(cluster_of.max()) + 1
    queries: Dict[int, QueryDocs] = {}
    for qid in range(num_queries):
        grades = rng.integers(0, 5, size=docs_per_query)
        own = rng.normal(0.0, 1.0, size=(docs_per_query, num_features))
        if rho > 0.0:
            shared = rng.normal(0.0, 1.0, size=(docs_per_query, n_clusters))
            noise = np.sqrt(rho) * shared[:, cluster_of] + np.sqrt(1.0 - rho) * own
        else:
            noise = own
        features = grades[:, None] * weights[None, :] + noise_scale * noise
        queries[qid] = QueryDocs(features, grades)
    return Dataset(queries, num_features, max_grade=4)


def split_queries(ds: Dataset, train_fraction: float, seed: int) -> QuerySplit:
    """Deterministic shuffled train/test split; both sides non-empty."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train fraction must be in (0, 1)")
    qids = ds.query_ids()
    if len(qids) < 2:
        raise ValueError("need at least two queries to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(qids))
    n_train = max(1, int(len(qids) * train_fraction))
    n_train = min(n_train, len(qids) - 1)
    train = tuple(qids[i] for i in perm[:n_train])
    test = tuple(qids[i] for i in perm[n_train:])
    return QuerySplit(train, test)
