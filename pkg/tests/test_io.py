import logging
import struct

import numpy as np
import pytest

from prunerank.index import Ranking, ScoredHit
from prunerank.io import (
    FormatError,
    load_pca,
    read_ids,
    read_qrels,
    read_run,
    read_vectors,
    save_pca,
    vector_file_size,
    write_ids,
    write_qrels,
    write_run,
    write_vectors,
)
from prunerank.pca import fit_pca


def test_vector_round_trip_f32(tmp_path, rng):
    m = rng.standard_normal((7, 5)).astype(np.float32)
    path = tmp_path / "v.fvecs"
    write_vectors(path, m)
    assert path.stat().st_size == vector_file_size(7, 5) == 7 * (4 + 20)
    back = read_vectors(path)
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back, m)


def test_vector_round_trip_f64(tmp_path, rng):
    m = rng.standard_normal((3, 4))
    path = tmp_path / "v.f64"
    write_vectors(path, m)
    assert path.stat().st_size == vector_file_size(3, 4, np.float64)
    back = read_vectors(path)
    assert back.dtype == np.float64
    np.testing.assert_array_equal(back, m)


def test_vector_layout(tmp_path):
    path = tmp_path / "v.fvecs"
    write_vectors(path, [[1.0, 2.0]])
    assert path.read_bytes() == struct.pack("<iff", 2, 1.0, 2.0)


def test_vector_dim_mismatch(tmp_path):
    path = tmp_path / "bad.fvecs"
    path.write_bytes(struct.pack("<iff", 2, 1, 2) + struct.pack("<iff", 3, 1, 2))
    with pytest.raises(FormatError, match="record 2 has dim 3"):
        read_vectors(path)


def test_vector_truncated(tmp_path):
    path = tmp_path / "bad.fvecs"
    path.write_bytes(struct.pack("<iff", 2, 1, 2) + struct.pack("<if", 2, 1))
    with pytest.raises(FormatError, match="byte offset 12"):
        read_vectors(path)


def test_vector_empty(tmp_path):
    path = tmp_path / "empty.fvecs"
    path.write_bytes(b"")
    assert read_vectors(path).shape == (0, 0)


def test_ids(tmp_path):
    path = tmp_path / "ids.txt"
    write_ids(path, ["a", "b"])
    assert read_ids(path) == ["a", "b"]
    path.write_text("a\nb\na\n")
    with pytest.raises(FormatError, match=":3: duplicate"):
        read_ids(path)
    path.write_text("a\n\n")
    with pytest.raises(FormatError, match=":2: empty"):
        read_ids(path)


def test_qrels(tmp_path):
    path = tmp_path / "qrels"
    path.write_text("q1 0 d7 2\n\nq1 0 d8 0\nq2 0 d1 1\n")
    assert read_qrels(path) == {"q1": {"d7": 2, "d8": 0}, "q2": {"d1": 1}}
    out = tmp_path / "out"
    write_qrels(out, read_qrels(path))
    assert read_qrels(out) == read_qrels(path)


@pytest.mark.parametrize(
    "text, message",
    [
        ("q1 0 d7\n", "expected 4 fields"),
        ("q1 0 d7 x\n", "not an integer"),
        ("q1 0 d7 -1\n", "negative grade"),
        ("q1 0 d7 1\nq1 0 d7 2\n", ":2: duplicate"),
    ],
)
def test_qrels_errors(tmp_path, text, message):
    path = tmp_path / "qrels"
    path.write_text(text)
    with pytest.raises(FormatError, match=message):
        read_qrels(path)


def test_run_round_trip(tmp_path):
    rankings = [
        Ranking("q1", (ScoredHit("d2", 0.9), ScoredHit("d1", 0.5))),
        Ranking("q2", (ScoredHit("d3", -1.25),)),
    ]
    path = tmp_path / "run"
    write_run(path, rankings, "full")
    assert path.read_text().splitlines()[0] == "q1 Q0 d2 1 0.900000 full"
    assert read_run(path) == rankings


def test_run_rank_disagreement_warns(tmp_path, caplog):
    path = tmp_path / "run"
    path.write_text("q Q0 a 1 0.1 t\nq Q0 b 2 0.9 t\n")
    with caplog.at_level(logging.WARNING):
        (ranking,) = read_run(path)
    assert ranking.doc_ids() == ["b", "a"]
    assert "disagrees" in caplog.text


def test_run_ties_do_not_warn(tmp_path, caplog):
    path = tmp_path / "run"
    path.write_text("q Q0 b 1 0.5 t\nq Q0 a 2 0.5 t\n")
    with caplog.at_level(logging.WARNING):
        (ranking,) = read_run(path)
    assert ranking.doc_ids() == ["a", "b"]
    assert caplog.text == ""


def test_run_errors(tmp_path):
    path = tmp_path / "run"
    path.write_text("q Q0 a 1 0.5\n")
    with pytest.raises(FormatError, match="6 fields"):
        read_run(path)
    path.write_text("q Q0 a 1 0.5 t\nq Q0 a 2 0.4 t\n")
    with pytest.raises(FormatError, match="duplicate doc"):
        read_run(path)


def test_pca_round_trip(tmp_path, rng):
    model = fit_pca(rng.standard_normal((40, 6)), source_tag="corpus-α")
    path = tmp_path / "m.pca"
    save_pca(path, model)
    assert path.stat().st_size == 4 + 20 + len("corpus-α".encode()) + 8 * 6 + 8 * 36
    back = load_pca(path)
    assert back.fitted_on == 40 and back.source_tag == "corpus-α"
    assert back.eigenvalues.tobytes() == model.eigenvalues.tobytes()
    assert back.basis.tobytes() == np.ascontiguousarray(model.basis).tobytes()


def test_pca_rejects_bad_files(tmp_path, rng):
    path = tmp_path / "m.pca"
    save_pca(path, fit_pca(rng.standard_normal((10, 3))))
    good = path.read_bytes()
    path.write_bytes(b"XXXX" + good[4:])
    with pytest.raises(FormatError, match="magic"):
        load_pca(path)
    path.write_bytes(good[:4] + struct.pack("<I", 2) + good[8:])
    with pytest.raises(FormatError, match="version 2"):
        load_pca(path)
    path.write_bytes(good[:-1])
    with pytest.raises(FormatError, match="expected"):
        load_pca(path)
