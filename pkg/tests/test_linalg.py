import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prunerank.linalg import (
    ConvergenceError,
    gram_matrix,
    project,
    symmetrize,
    sym_eigendecomposition,
)

from conftest import random_psd, random_symmetric


def test_gram_examples():
    np.testing.assert_array_equal(gram_matrix([[1, 0], [0, 1]]), np.eye(2))
    np.testing.assert_array_equal(gram_matrix([[1, 1]]), [[1, 1], [1, 1]])
    np.testing.assert_array_equal(gram_matrix([[1, 2], [3, 4], [5, 6]]), [[35, 44], [44, 56]])


def test_gram_errors():
    with pytest.raises(ValueError, match="empty input matrix"):
        gram_matrix(np.empty((0, 3)))
    with pytest.raises(ValueError, match="non-finite input"):
        gram_matrix([[1.0, np.nan]])
    with pytest.raises(ValueError, match="non-finite input"):
        gram_matrix([[np.inf, 0.0]])


def test_gram_exactly_symmetric(rng):
    g = gram_matrix(rng.standard_normal((50, 17)))
    assert np.array_equal(g, g.T)


def test_symmetrize_is_exact():
    a = np.array([[1.0, 2.0], [4.0, 3.0]])
    s = symmetrize(a)
    assert np.array_equal(s, s.T)
    assert s[0, 1] == 3.0


def test_eig_diagonal(backend):
    eig = sym_eigendecomposition(np.diag([3.0, 1.0]))
    np.testing.assert_array_equal(eig.eigenvalues, [3.0, 1.0])
    np.testing.assert_array_equal(eig.eigenvectors, np.eye(2))


def test_eig_diagonal_reorders(backend):
    eig = sym_eigendecomposition(np.diag([1.0, 5.0, 3.0]))
    np.testing.assert_array_equal(eig.eigenvalues, [5.0, 3.0, 1.0])
    np.testing.assert_array_equal(eig.eigenvectors, np.eye(3)[:, [1, 2, 0]])


def test_eig_two_by_two_closed_form(backend):
    eig = sym_eigendecomposition([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(eig.eigenvalues, [3.0, 1.0], atol=1e-14)
    r = 1 / math.sqrt(2)
    # largest-magnitude entry positive, ties to the lowest index
    np.testing.assert_allclose(eig.eigenvectors[:, 0], [r, r], atol=1e-14)
    np.testing.assert_allclose(eig.eigenvectors[:, 1], [r, -r], atol=1e-14)


def test_eig_identity_degenerate(backend):
    eig = sym_eigendecomposition(np.eye(4))
    np.testing.assert_array_equal(eig.eigenvalues, np.ones(4))
    w = eig.eigenvectors
    assert np.linalg.norm(w.T @ w - np.eye(4)) <= 1e-10
    assert np.linalg.norm(np.eye(4) @ w - w) <= 1e-8


def test_eig_deterministic(backend, rng):
    s = random_psd(rng, 20)
    a = sym_eigendecomposition(s)
    b = sym_eigendecomposition(s)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_eig_sign_convention(backend, rng):
    eig = sym_eigendecomposition(random_psd(rng, 12))
    w = eig.eigenvectors
    lead = np.argmax(np.abs(w), axis=0)
    assert np.all(w[lead, np.arange(12)] > 0)


def test_eig_zero_matrix(backend):
    eig = sym_eigendecomposition(np.zeros((3, 3)))
    np.testing.assert_array_equal(eig.eigenvalues, np.zeros(3))
    np.testing.assert_array_equal(eig.eigenvectors, np.eye(3))


def test_eig_rank_deficient_clamps_to_zero(backend):
    d = np.array([[3.0, 4.0, 0.0]])
    eig = sym_eigendecomposition(gram_matrix(d))
    assert np.all(eig.eigenvalues >= 0)
    np.testing.assert_allclose(eig.eigenvalues, [25.0, 0.0, 0.0], atol=1e-12)


def test_eig_keeps_genuine_negatives(backend):
    eig = sym_eigendecomposition([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(eig.eigenvalues, [1.0, -1.0], atol=1e-14)


def test_eig_nonconvergence_reports_residual(backend, rng):
    with pytest.raises(ConvergenceError, match="did not converge.*residual"):
        sym_eigendecomposition(random_symmetric(rng, 10), max_sweeps=1)


def test_eig_matches_lapack(backend, rng):
    s = random_psd(rng, 40)
    eig = sym_eigendecomposition(s)
    np.testing.assert_allclose(
        eig.eigenvalues, np.linalg.eigvalsh(s)[::-1], rtol=1e-10, atol=1e-10 * np.trace(s)
    )


def _check_invariants(s, eig):
    d = s.shape[0]
    w, lam = eig.eigenvectors, eig.eigenvalues
    fro = np.linalg.norm(s)
    assert np.all(np.diff(lam) <= 0)
    assert np.linalg.norm(w @ np.diag(lam) @ w.T - s) <= 1e-8 * max(1.0, fro)
    assert abs(lam.sum() - np.trace(s)) <= 1e-8 * max(1.0, abs(np.trace(s)))
    assert np.linalg.norm(w.T @ w - np.eye(d)) <= 1e-9 * d
    assert np.max(np.abs(w.T @ w - np.eye(d))) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 64), seed=st.integers(0, 2**32 - 1))
def test_eig_property_random_symmetric(d, seed):
    s = random_symmetric(np.random.default_rng(seed), d)
    eig = sym_eigendecomposition(s)
    _check_invariants(symmetrize(s), eig)


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 64), seed=st.integers(0, 2**32 - 1))
def test_eig_property_random_psd(d, seed):
    rng = np.random.default_rng(seed)
    s = gram_matrix(rng.standard_normal((rng.integers(1, 2 * d + 2), d)))
    eig = sym_eigendecomposition(s)
    _check_invariants(s, eig)
    assert np.all(eig.eigenvalues >= 0)
    tr = np.trace(s)
    for i in range(d):
        v = eig.eigenvectors[:, i]
        assert np.linalg.norm(s @ v - eig.eigenvalues[i] * v) <= 1e-8 * max(1.0, tr)


def test_project_examples():
    np.testing.assert_array_equal(project(np.eye(2), [[5, 6], [7, 8]]), [[5, 6], [7, 8]])
    np.testing.assert_array_equal(project([[1, 2]], [[1], [1]]), [[3]])
    np.testing.assert_array_equal(project([[1, 2], [3, 4]], [[0, 1], [1, 0]]), [[2, 1], [4, 3]])


def test_project_mismatch_names_shapes():
    with pytest.raises(ValueError, match=r"\(2, 3\).*\(2, 2\)"):
        project(np.ones((2, 3)), np.ones((2, 2)))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 30), d=st.integers(1, 24), seed=st.integers(0, 2**32 - 1))
def test_project_roundtrip_orthogonal(n, d, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, d))
    w = sym_eigendecomposition(random_psd(rng, d)).eigenvectors
    back = project(project(a, w), w.T)
    assert np.linalg.norm(back - a) <= 1e-8 * np.linalg.norm(a)
