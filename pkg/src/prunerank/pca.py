"""Uncentered PCA on document embeddings and the pruned transforms derived from it."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from prunerank.linalg import as_dense, gram_matrix, project, sym_eigendecomposition


@dataclass(frozen=True)
class PcaModel:
    """Full eigendecomposition of ``D^T D`` for some fitting sample.

    ``basis`` is d x d with principal directions as columns, ordered by the
    non-increasing ``eigenvalues``.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray
    fitted_on: int
    source_tag: str = ""

    def __post_init__(self):
        d = self.eigenvalues.shape[0]
        if self.basis.shape != (d, d):
            raise ValueError(f"basis shape {self.basis.shape} does not match {d} eigenvalues")
        if np.any(self.eigenvalues < 0):
            raise ValueError("eigenvalues must be non-negative")
        if np.any(np.diff(self.eigenvalues) > 0):
            raise ValueError("eigenvalues must be non-increasing")
        self.eigenvalues.flags.writeable = False
        self.basis.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class PrunedTransform:
    """The leading ``dim_out`` principal directions of a model."""

    matrix: np.ndarray
    cutoff: float
    retained_variance: float
    source_tag: str = field(default="", compare=False)

    def __post_init__(self):
        self.matrix.flags.writeable = False

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim_out(self) -> int:
        return self.matrix.shape[1]


def sample_rows(d, count: int, seed: int) -> np.ndarray:
    """Pick ``count`` distinct rows uniformly at random, keeping their original order.

    The draw uses a PCG64 generator seeded with ``seed``, so it is
    reproducible across runs and platforms.
    """
    d = np.asarray(d)
    n = d.shape[0]
    if not 1 <= count <= n:
        raise ValueError(f"sample size {count} out of range [1, {n}]")
    if count == n:
        return d.copy()
    rng = np.random.Generator(np.random.PCG64(seed))
    picked = np.sort(rng.choice(n, size=count, replace=False))
    return d[picked]


def fit_pca(sample, source_tag: str = "", center: bool = False) -> PcaModel:
    """Fit the uncentered PCA: eigendecomposition of ``sample^T sample``.

    ``center=True`` subtracts the column means first. The basis is still
    applied to raw vectors, so full-width scores stay exact, but the leading
    directions then follow the centered spread rather than the uncentered
    second moment that the reconstruction identity is stated for.
    """
    sample = as_dense(sample, "sample")
    if center:
        sample = sample - sample.mean(axis=0)
    eig = sym_eigendecomposition(gram_matrix(sample))
    # D^T D is PSD; anything still negative is solver noise
    values = np.maximum(eig.eigenvalues, 0.0)
    return PcaModel(values, np.array(eig.eigenvectors), sample.shape[0], source_tag)


def cutoff_to_m(cutoff: float, d: int) -> int:
    """Number of kept dimensions for a cutoff: ``d - round(cutoff * d)``, at least 1.

    Rounding is half away from zero, so ``cutoff_to_m(0.75, 10) == 2``.
    """
    if not 0.0 <= cutoff < 1.0:
        raise ValueError(f"cutoff must be in [0, 1), got {cutoff}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    removed = math.floor(cutoff * d + 0.5)
    return min(d, max(1, d - removed))


def retained_variance(eigenvalues, m: int) -> float:
    """Fraction of eigenvalue mass carried by the first ``m`` components."""
    # one cumulative sum for numerator and total keeps the ratio exactly monotone
    running = np.cumsum(np.asarray(eigenvalues, dtype=np.float64))
    total = float(running[-1])
    if total == 0.0:
        return 1.0
    return float(running[m - 1]) / total


def prune_model(model: PcaModel, cutoff: float) -> PrunedTransform:
    m = cutoff_to_m(cutoff, model.dim)
    matrix = np.ascontiguousarray(model.basis[:, :m])
    return PrunedTransform(
        matrix, float(cutoff), retained_variance(model.eigenvalues, m), model.source_tag
    )


def transform_corpus(d, transform: PrunedTransform) -> np.ndarray:
    """Map documents into the pruned space (n x m, float64).

    Works for any corpus with the model's width, which is how a transform
    fitted on one collection is reused on another.
    """
    d = np.asarray(d)
    if d.ndim != 2 or d.shape[1] != transform.dim_in:
        raise ValueError(
            f"dimension mismatch: corpus shape {d.shape} vs transform {transform.matrix.shape}"
        )
    return project(d, transform.matrix)


def transform_query(q, transform: PrunedTransform) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != transform.dim_in:
        raise ValueError(
            f"dimension mismatch: query shape {q.shape} vs transform {transform.matrix.shape}"
        )
    return transform.matrix.T @ q


def reconstruction_error(d, transform: PrunedTransform) -> float:
    """Squared Frobenius norm of what the pruned basis cannot represent.

    Computes ``||D - (D W_m) W_m^T||_F^2`` directly. When the model was
    fitted on all of ``D`` this equals the sum of the discarded eigenvalues.
    """
    d = np.asarray(d, dtype=np.float64)
    reduced = transform_corpus(d, transform)
    residual = d - project(reduced, transform.matrix.T)
    return float(np.sum(residual * residual))
