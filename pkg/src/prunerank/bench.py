"""Wall-clock throughput of exact search over full and pruned indexes."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from prunerank._backend import BACKEND
from prunerank.index import EmbeddingIndex, score_all, top_k
from prunerank.pca import PrunedTransform, transform_query

TSV_HEADER = "tag\tdim\tbackend\tthreads\tqueries\trepetitions\tmedian_s\tqueries_per_sec\tmean_latency_ms"


@dataclass(frozen=True)
class BenchReport:
    tag: str
    dim: int
    n_queries: int
    timings: tuple[float, ...]
    backend: str = BACKEND
    threads: int = 1

    @property
    def median_seconds(self) -> float:
        return statistics.median(self.timings)

    @property
    def queries_per_sec(self) -> float:
        return self.n_queries / self.median_seconds

    @property
    def mean_latency_ms(self) -> float:
        return 1000.0 * self.median_seconds / self.n_queries

    def tsv_row(self) -> str:
        return (
            f"{self.tag}\t{self.dim}\t{self.backend}\t{self.threads}\t{self.n_queries}\t"
            f"{len(self.timings)}\t{self.median_seconds:.6f}\t{self.queries_per_sec:.3f}\t"
            f"{self.mean_latency_ms:.4f}"
        )


def _pass(index: EmbeddingIndex, queries: np.ndarray, transform, k: int) -> None:
    for q in queries:
        if transform is not None:
            q = transform_query(q, transform)
        top_k(score_all(index, q), index.doc_ids, k)


def bench_throughput(
    index: EmbeddingIndex,
    queries,
    repetitions: int = 5,
    transform: PrunedTransform | None = None,
    k: int = 10,
) -> BenchReport:
    """Time scoring plus top-k selection over all queries, single-threaded.

    One untimed warm-up pass, then ``repetitions`` timed passes; the
    report's rates use the median. With ``transform`` the queries are raw
    and the per-query projection is included in the timing.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    queries = np.asarray(queries, dtype=np.float64)
    expected = transform.dim_in if transform is not None else index.dim
    if queries.ndim != 2 or queries.shape[1] != expected:
        raise ValueError(f"queries of shape {queries.shape} do not match input dim {expected}")
    if transform is not None and transform.dim_out != index.dim:
        raise ValueError(f"transform output dim {transform.dim_out} != index dim {index.dim}")
    _pass(index, queries, transform, k)
    timings = []
    for _ in range(repetitions):
        start = time.perf_counter()
        _pass(index, queries, transform, k)
        timings.append(time.perf_counter() - start)
    return BenchReport(index.tag, index.dim, queries.shape[0], tuple(timings))
