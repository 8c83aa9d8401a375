import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prunerank.index import (
    EmbeddingIndex,
    Ranking,
    ScoredHit,
    resolve_threads,
    score_all,
    search,
    search_many,
    top_k,
)
from prunerank.pca import fit_pca, prune_model, transform_query


def full_sort_top_k(scores, ids, k):
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], ids[i]))
    return [ScoredHit(ids[i], float(scores[i])) for i in order[:k]]


def test_score_all_examples(backend):
    idx = EmbeddingIndex(["a", "b"], np.eye(2))
    np.testing.assert_array_equal(score_all(idx, [0.5, 2.0]), [0.5, 2.0])
    one = EmbeddingIndex(["x"], [[1.0, 2.0, 3.0]])
    np.testing.assert_array_equal(score_all(one, [1.0, 1.0, 1.0]), [6.0])
    two = EmbeddingIndex(["a", "b"], [[1.0, 0.0], [0.6, 0.8]], dtype=np.float64)
    np.testing.assert_allclose(score_all(two, [1.0, 0.0]), [1.0, 0.6], rtol=0, atol=0)


def test_score_all_accumulates_in_float64(backend):
    row = np.full((1, 1000), 0.1, dtype=np.float32)
    idx = EmbeddingIndex(["a"], row)
    expected = float(np.sum(row.astype(np.float64)))
    assert score_all(idx, np.ones(1000)) == pytest.approx(expected, rel=1e-13)


def test_score_all_mismatch(backend):
    with pytest.raises(ValueError, match="dimension mismatch"):
        score_all(EmbeddingIndex(["a"], [[1.0, 2.0]]), [1.0, 2.0, 3.0])


def test_index_validation():
    with pytest.raises(ValueError, match="unique"):
        EmbeddingIndex(["a", "a"], np.ones((2, 2)))
    with pytest.raises(ValueError, match="doc ids"):
        EmbeddingIndex(["a"], np.ones((2, 2)))
    with pytest.raises(ValueError):
        EmbeddingIndex([], np.ones((0, 0)))
    idx = EmbeddingIndex(["a"], np.ones((1, 3)))
    assert idx.matrix.dtype == np.float32 and idx.dim == 3
    with pytest.raises(ValueError):
        idx.matrix[0, 0] = 5.0


def test_top_k_examples():
    assert top_k([0.1, 0.9, 0.5], ["a", "b", "c"], 2) == [("b", 0.9), ("c", 0.5)]
    assert [h.doc_id for h in top_k([1.0, 1.0, 1.0], ["b", "a", "c"], 3)] == ["a", "b", "c"]
    assert len(top_k([1.0, 2.0], ["a", "b"], 10)) == 2
    with pytest.raises(ValueError):
        top_k([1.0], ["a"], 0)


@pytest.mark.parametrize("k", [1, 10, 100])
def test_top_k_matches_full_sort(rng, k):
    for trial in range(50):
        n = int(rng.integers(1, 1500))
        if trial % 2:
            scores = rng.integers(0, 5, size=n).astype(float)
        else:
            scores = rng.standard_normal(n)
        ids = [f"d{j}" for j in rng.permutation(n)]
        assert top_k(scores, ids, k) == full_sort_top_k(scores, ids, k)


def test_search_examples(backend):
    idx = EmbeddingIndex(["first", "second"], [[1.0, 0.0], [0.0, 1.0]])
    r = search(idx, "q", [0.9, 0.1], k=1)
    assert r == Ranking("q", (ScoredHit("first", pytest.approx(0.9)),))
    assert len(search(idx, "q", [1.0, 1.0], k=5).hits) == 2


def test_search_full_vs_zero_cutoff(backend, rng):
    docs = rng.standard_normal((500, 24))
    ids = [f"d{i}" for i in range(500)]
    full = EmbeddingIndex(ids, docs, dtype=np.float64)
    t = prune_model(fit_pca(docs), 0.0)
    pruned = EmbeddingIndex.from_transform(ids, docs, t)
    for q in rng.standard_normal((10, 24)):
        a = search(full, "q", q, k=50)
        b = search(pruned, "q", transform_query(q, t), k=50)
        assert a.doc_ids() == b.doc_ids()


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 100), d=st.integers(2, 16), seed=st.integers(0, 2**32 - 1),
       c=st.sampled_from([0.0, 0.25, 0.5, 0.75]))
def test_pruned_scores_equal_explicit_projection(n, d, seed, c):
    rng = np.random.default_rng(seed)
    docs = rng.standard_normal((n, d))
    q = rng.standard_normal(d)
    t = prune_model(fit_pca(docs), c)
    idx = EmbeddingIndex.from_transform([str(i) for i in range(n)], docs, t)
    scores = score_all(idx, transform_query(q, t))
    w = t.matrix
    explicit = np.array([q @ w @ w.T @ row for row in docs])
    np.testing.assert_allclose(scores, explicit, rtol=1e-9, atol=1e-9 * np.linalg.norm(q) * np.max(np.linalg.norm(docs, axis=1)))


def test_search_many_thread_independent(rng, monkeypatch):
    docs = rng.standard_normal((2000, 32)).astype(np.float32)
    ids = [f"d{i}" for i in range(2000)]
    idx = EmbeddingIndex(ids, docs)
    queries = rng.standard_normal((12, 32))
    qids = [f"q{i}" for i in range(12)]
    one = search_many(idx, qids, queries, k=20, threads=1)
    four = search_many(idx, qids, queries, k=20, threads=4)
    assert one == four
    monkeypatch.setenv("PRUNERANK_THREADS", "3")
    assert resolve_threads() == 3
    assert search_many(idx, qids, queries, k=20) == one
    with pytest.raises(ValueError):
        resolve_threads(0)
