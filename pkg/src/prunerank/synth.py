"""Synthetic corpora with a known low-rank signal and planted relevance.

Documents and queries follow a linear factor model: ``r`` latent factors
with scales ``decay**i`` along an orthonormal basis of R^d, plus isotropic
Gaussian noise. Qrels mark each query's ``k_relevant`` documents with the
highest noise-free latent inner product.

Random streams (all PCG64, each from its own ``SeedSequence``):

* basis: ``SeedSequence(latent_seed, spawn_key=(0,))``
* document factors, document noise, query factors, query noise:
  ``SeedSequence(seed, spawn_key=(1,))`` ... ``(4,)``

so two corpora sharing ``latent_seed`` but not ``seed`` come from the same
latent model.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_QRELS_CHUNK = 256


@dataclass(frozen=True)
class SynthSpec:
    n_docs: int
    n_queries: int
    dim: int
    intrinsic_rank: int
    signal_decay: float = 0.95
    noise_sigma: float = 0.05
    seed: int = 0
    k_relevant: int = 10
    latent_seed: int | None = None

    def __post_init__(self):
        for name in ("n_docs", "n_queries", "dim", "intrinsic_rank", "k_relevant"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.intrinsic_rank > self.dim:
            raise ValueError(
                f"intrinsic rank {self.intrinsic_rank} exceeds dimension {self.dim}"
            )
        if not 0.0 < self.signal_decay <= 1.0:
            raise ValueError(f"signal_decay must be in (0, 1], got {self.signal_decay}")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.k_relevant > self.n_docs:
            raise ValueError("k_relevant cannot exceed n_docs")

    @property
    def model_seed(self) -> int:
        return self.seed if self.latent_seed is None else self.latent_seed


@dataclass(frozen=True)
class SynthCorpus:
    docs: np.ndarray
    doc_ids: list[str]
    queries: np.ndarray
    query_ids: list[str]
    qrels: dict[str, dict[str, int]]
    basis: np.ndarray
    scales: np.ndarray


def _stream(entropy: int, key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy, spawn_key=(key,))))


def latent_basis(dim: int, rank: int, seed: int) -> np.ndarray:
    """Orthonormal d x r basis from QR of a Gaussian matrix, signs fixed by R's diagonal."""
    g = _stream(seed, 0).standard_normal((dim, rank))
    q, r = np.linalg.qr(g)
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def _ids(prefix: str, count: int) -> list[str]:
    width = len(str(count - 1))
    return [f"{prefix}{i:0{width}d}" for i in range(count)]


def generate(spec: SynthSpec) -> SynthCorpus:
    basis = latent_basis(spec.dim, spec.intrinsic_rank, spec.model_seed)
    scales = spec.signal_decay ** np.arange(spec.intrinsic_rank, dtype=np.float64)

    doc_factors = _stream(spec.seed, 1).standard_normal((spec.n_docs, spec.intrinsic_rank)) * scales
    doc_noise = _stream(spec.seed, 2).standard_normal((spec.n_docs, spec.dim))
    query_factors = _stream(spec.seed, 3).standard_normal((spec.n_queries, spec.intrinsic_rank)) * scales
    query_noise = _stream(spec.seed, 4).standard_normal((spec.n_queries, spec.dim))

    docs = doc_factors @ basis.T + spec.noise_sigma * doc_noise
    queries = query_factors @ basis.T + spec.noise_sigma * query_noise
    doc_ids = _ids("d", spec.n_docs)
    query_ids = _ids("q", spec.n_queries)

    qrels: dict[str, dict[str, int]] = {}
    k = spec.k_relevant
    for start in range(0, spec.n_queries, _QRELS_CHUNK):
        truth = query_factors[start:start + _QRELS_CHUNK] @ doc_factors.T
        for row, scores in enumerate(truth):
            if k < spec.n_docs:
                top = np.argpartition(-scores, k - 1)[:k]
            else:
                top = np.arange(spec.n_docs)
            qrels[query_ids[start + row]] = {doc_ids[i]: 1 for i in sorted(top.tolist())}
    return SynthCorpus(docs, doc_ids, queries, query_ids, qrels, basis, scales)
