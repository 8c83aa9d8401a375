"""Dense matrix kernels: Gram matrix, symmetric eigendecomposition, projection.

Matrices are plain C-contiguous ``numpy`` arrays; the helpers here validate
shape and finiteness at the boundary and keep everything else in float64.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from prunerank._backend import kernels

EIG_TOL = 1e-12
EIG_MAX_SWEEPS = 100
# round-off negatives above -NEG_CLAMP * ||S||_F are reported as exact zeros
NEG_CLAMP = 1e-10


class ConvergenceError(RuntimeError):
    """Raised when the Jacobi eigensolver exhausts its sweep budget."""


def as_dense(values, name: str = "matrix") -> np.ndarray:
    """Return ``values`` as a finite, non-empty, C-contiguous 2-D float64 array."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("empty input matrix")
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise ValueError("non-finite input")
    return arr


def symmetrize(values) -> np.ndarray:
    """Exactly symmetric copy ``(A + A^T) / 2`` of a square matrix."""
    a = as_dense(values, "symmetric matrix")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"symmetric matrix must be square, got shape {a.shape}")
    return np.ascontiguousarray((a + a.T) / 2.0)


def gram_matrix(d) -> np.ndarray:
    """Uncentered Gram matrix ``D^T D`` (d x d), exactly symmetric."""
    d = as_dense(d)
    return symmetrize(d.T @ d)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs of a symmetric matrix.

    ``eigenvalues`` are non-increasing; column ``i`` of ``eigenvectors`` is
    the unit eigenvector for ``eigenvalues[i]``, sign-normalized so its
    largest-magnitude entry is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def __post_init__(self):
        for arr in (self.eigenvalues, self.eigenvectors):
            arr.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def _normalize_signs(vectors: np.ndarray) -> np.ndarray:
    # argmax returns the first index on ties, which is the lowest-index rule
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[lead, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return np.ascontiguousarray(vectors * signs)


def sym_eigendecomposition(
    s, *, tol: float = EIG_TOL, max_sweeps: int = EIG_MAX_SWEEPS
) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Converges when the off-diagonal Frobenius norm drops to
    ``tol * ||S||_F``. Eigenvalues come back sorted descending (stable, so
    exactly equal values keep solver order), eigenvectors sign-normalized,
    and tiny negative round-off values clamped to zero.
    """
    s = symmetrize(s)
    values, vectors, sweeps, off = kernels.jacobi_eigh(s, float(tol), int(max_sweeps))
    fro = float(np.linalg.norm(s))
    if off > tol * fro:
        residual = float(np.linalg.norm(s @ vectors - vectors * values))
        raise ConvergenceError(
            f"eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off:.3e}, residual {residual:.3e})"
        )
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = _normalize_signs(vectors[:, order])
    clamp = (values < 0) & (values >= -NEG_CLAMP * max(1.0, fro))
    values = np.where(clamp, 0.0, values)
    return EigenDecomposition(values, vectors, int(sweeps))


def project(a, b) -> np.ndarray:
    """Matrix product ``A @ B`` in float64.

    Raises ``ValueError`` naming both shapes when the inner dimensions differ.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: cannot multiply {a.shape} by {b.shape}")
    return np.ascontiguousarray(a @ b)
