"""TREC-style effectiveness metrics: AP, nDCG@k, MRR@k."""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping

from prunerank.index import Ranking

log = logging.getLogger(__name__)

Qrels = Dict[str, Dict[str, int]]

DEFAULT_METRICS = ("AP", "nDCG@10", "MRR@10")


def _judgments(ranking: Ranking, qrels: Mapping[str, Mapping[str, int]]):
    try:
        return qrels[ranking.query_id]
    except KeyError:
        raise KeyError(f"query {ranking.query_id!r} has no relevance judgments") from None


def average_precision(ranking: Ranking, qrels, rel_threshold: int = 1, depth: int = 1000) -> float:
    judged = _judgments(ranking, qrels)
    n_relevant = sum(1 for g in judged.values() if g >= rel_threshold)
    if n_relevant == 0:
        return 0.0
    found = 0
    total = 0.0
    for rank, hit in enumerate(ranking.hits[:depth], start=1):
        if judged.get(hit.doc_id, 0) >= rel_threshold:
            found += 1
            total += found / rank
    return total / n_relevant


def _gain(grade: int, gain: str) -> float:
    if gain in ("exp", "exponential"):
        return 2.0 ** grade - 1.0
    if gain == "linear":
        return float(grade)
    raise ValueError(f"unknown gain {gain!r}; expected 'exponential' or 'linear'")


def ndcg_at_k(ranking: Ranking, qrels, k: int = 10, gain: str = "exponential") -> float:
    """nDCG@k with the ideal ordering taken over every judged document."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    judged = _judgments(ranking, qrels)
    dcg = sum(
        _gain(judged.get(hit.doc_id, 0), gain) / math.log2(rank + 1)
        for rank, hit in enumerate(ranking.hits[:k], start=1)
    )
    ideal = sorted(judged.values(), reverse=True)[:k]
    idcg = sum(_gain(g, gain) / math.log2(rank + 1) for rank, g in enumerate(ideal, start=1))
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


def mrr_at_k(ranking: Ranking, qrels, k: int = 10, rel_threshold: int = 1) -> float:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    judged = _judgments(ranking, qrels)
    for rank, hit in enumerate(ranking.hits[:k], start=1):
        if judged.get(hit.doc_id, 0) >= rel_threshold:
            return 1.0 / rank
    return 0.0


@dataclass(frozen=True)
class EvalConfig:
    metrics: tuple[str, ...] = DEFAULT_METRICS
    gain: str = "exponential"
    rel_threshold: int = 1
    depth: int = 1000


@dataclass(frozen=True)
class MetricReport:
    metric: str
    per_query: dict[str, float]
    mean: float


_METRIC_RE = re.compile(r"^(AP|nDCG|MRR)(?:@(\d+))?$")


def parse_metric(name: str):
    """Split ``'nDCG@10'`` into ``('nDCG', 10)``; AP takes no cutoff."""
    match = _METRIC_RE.match(name)
    if not match:
        raise ValueError(f"unknown metric {name!r}; expected AP, nDCG@k or MRR@k")
    kind, cutoff = match.group(1), match.group(2)
    if kind == "AP":
        if cutoff is not None:
            raise ValueError("AP takes its depth from the config, not '@k'")
        return kind, None
    if cutoff is None or int(cutoff) < 1:
        raise ValueError(f"{kind} needs a cutoff, e.g. {kind}@10")
    return kind, int(cutoff)


def metric_value(name: str, ranking: Ranking, qrels, config: EvalConfig) -> float:
    kind, cutoff = parse_metric(name)
    if kind == "AP":
        return average_precision(ranking, qrels, config.rel_threshold, config.depth)
    if kind == "nDCG":
        return ndcg_at_k(ranking, qrels, cutoff, config.gain)
    return mrr_at_k(ranking, qrels, cutoff, config.rel_threshold)


def evaluate_run(run: Iterable[Ranking], qrels, config: EvalConfig | None = None) -> list[MetricReport]:
    """One report per configured metric over every judged query.

    Judged queries missing from the run score 0. Run queries without
    judgments are skipped with a warning.
    """
    config = config or EvalConfig()
    for name in config.metrics:
        parse_metric(name)
    by_query = {}
    for ranking in run:
        by_query[ranking.query_id] = ranking
    if not by_query:
        raise ValueError("empty run")
    unjudged = sorted(set(by_query) - set(qrels))
    if unjudged:
        log.warning("skipping %d run queries without judgments (e.g. %s)", len(unjudged), unjudged[0])
    if not set(by_query) & set(qrels):
        raise ValueError("run and qrels share no queries")

    reports = []
    for name in config.metrics:
        per_query = {}
        for qid in qrels:
            ranking = by_query.get(qid)
            per_query[qid] = 0.0 if ranking is None else metric_value(name, ranking, qrels, config)
        mean = sum(per_query.values()) / len(per_query)
        reports.append(MetricReport(name, per_query, mean))
    return reports
