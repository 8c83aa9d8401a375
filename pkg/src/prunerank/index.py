"""Flat embedding index with exact top-k inner-product search."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from prunerank._backend import kernels
from prunerank.pca import PrunedTransform, transform_corpus, transform_query

DEFAULT_RUN_DEPTH = 1000


class ScoredHit(NamedTuple):
    doc_id: str
    score: float


@dataclass(frozen=True)
class Ranking:
    query_id: str
    hits: tuple[ScoredHit, ...]

    def doc_ids(self) -> list[str]:
        return [hit.doc_id for hit in self.hits]


class EmbeddingIndex:
    """Row-per-document embedding matrix with string ids.

    Storage defaults to float32; scores are always accumulated in float64.
    In-memory pipelines that transform a corpus may keep float64 storage so
    that an unpruned transform reproduces the original scores to rounding.
    """

    def __init__(self, doc_ids: Sequence[str], matrix, tag: str = "full", dtype=np.float32):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[1] < 1:
            raise ValueError(f"index matrix must be n x m with m >= 1, got shape {matrix.shape}")
        doc_ids = tuple(str(x) for x in doc_ids)
        if len(doc_ids) != matrix.shape[0]:
            raise ValueError(f"{len(doc_ids)} doc ids for {matrix.shape[0]} vectors")
        if len(set(doc_ids)) != len(doc_ids):
            raise ValueError("doc ids must be unique")
        dtype = np.dtype(dtype)
        if dtype not in (np.float32, np.float64):
            raise ValueError(f"unsupported storage dtype {dtype}")
        stored = np.ascontiguousarray(matrix, dtype=dtype)
        if not np.isfinite(stored).all():
            raise ValueError("non-finite input")
        stored.flags.writeable = False
        self.doc_ids = doc_ids
        self.matrix = stored
        self.tag = tag

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return self.matrix.shape[0]

    @property
    def nbytes(self) -> int:
        return self.matrix.nbytes

    @classmethod
    def from_transform(cls, doc_ids, docs, transform: PrunedTransform, tag: str | None = None,
                       dtype=np.float64) -> "EmbeddingIndex":
        reduced = transform_corpus(docs, transform)
        if tag is None:
            tag = f"pca-c{round(transform.cutoff * 100)}"
        return cls(doc_ids, reduced, tag=tag, dtype=dtype)


def score_all(index: EmbeddingIndex, q) -> np.ndarray:
    """Inner product of ``q`` with every indexed row, in float64."""
    q = np.ascontiguousarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != index.dim:
        raise ValueError(f"dimension mismatch: query shape {q.shape} vs index dim {index.dim}")
    return kernels.score_rows(index.matrix, q)


def top_k(scores, doc_ids, k: int) -> list[ScoredHit]:
    """The ``k`` best hits by score, ties broken by ascending doc id.

    Uses ``np.argpartition`` (introselect) to find the k-th score, then
    sorts only the candidates at or above it.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if scores.ndim != 1 or scores.shape[0] != len(doc_ids):
        raise ValueError(f"{scores.shape} scores for {len(doc_ids)} doc ids")
    n = scores.shape[0]
    if n == 0:
        return []
    if k < n:
        kth = scores[np.argpartition(-scores, k - 1)[k - 1]]
        candidates = np.flatnonzero(scores >= kth)
    else:
        candidates = np.arange(n)
    ordered = sorted(candidates.tolist(), key=lambda i: (-scores[i], doc_ids[i]))
    return [ScoredHit(doc_ids[i], float(scores[i])) for i in ordered[:k]]


def search(index: EmbeddingIndex, query_id: str, q, k: int = DEFAULT_RUN_DEPTH) -> Ranking:
    scores = score_all(index, q)
    return Ranking(query_id, tuple(top_k(scores, index.doc_ids, k)))


def resolve_threads(threads: int | None = None) -> int:
    """Thread count from the argument, then ``PRUNERANK_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("PRUNERANK_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


def search_many(
    index: EmbeddingIndex,
    query_ids: Sequence[str],
    queries,
    k: int = DEFAULT_RUN_DEPTH,
    transform: PrunedTransform | None = None,
    threads: int | None = None,
) -> list[Ranking]:
    """Run one search per query row, optionally mapping queries through ``transform`` first.

    Results are in query order and do not depend on the thread count.
    """
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[0] != len(query_ids):
        raise ValueError(f"{len(query_ids)} query ids for query matrix of shape {queries.shape}")

    def run(i: int) -> Ranking:
        q = queries[i]
        if transform is not None:
            q = transform_query(q, transform)
        return search(index, query_ids[i], q, k)

    threads = resolve_threads(threads)
    if threads == 1:
        return [run(i) for i in range(len(query_ids))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, range(len(query_ids))))
