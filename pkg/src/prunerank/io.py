"""Readers and writers for vectors, id sidecars, qrels, runs and PCA models.

Vector files use the raw per-record layout (little-endian int32 dim, then
dim float32 values), with a float64 variant for paths ending in ``.f64``.
"""
from __future__ import annotations

import logging
import os
import struct
from pathlib import Path

import numpy as np

from prunerank.index import Ranking, ScoredHit
from prunerank.pca import PcaModel

log = logging.getLogger(__name__)

PCA_MAGIC = b"PCAM"
PCA_VERSION = 1


class FormatError(ValueError):
    """Malformed input file; the message carries the location."""


def _vector_dtype(path) -> np.dtype:
    return np.dtype("<f8") if str(path).endswith(".f64") else np.dtype("<f4")


def read_vectors(path) -> np.ndarray:
    """Load a vector file as an (n, d) array in its storage precision.

    An empty file yields a (0, 0) array.
    """
    dtype = _vector_dtype(path)
    buf = Path(path).read_bytes()
    if not buf:
        return np.empty((0, 0), dtype=dtype.newbyteorder("="))
    if len(buf) < 4:
        raise FormatError(f"{path}: truncated record header at byte offset 0")
    dim = struct.unpack_from("<i", buf, 0)[0]
    if dim <= 0:
        raise FormatError(f"{path}: record 1 has invalid dim {dim}")
    record = 4 + dim * dtype.itemsize
    n_full = len(buf) // record
    if n_full:
        dims = np.ndarray((n_full,), dtype="<i4", buffer=buf, strides=(record,))
        bad = np.flatnonzero(dims != dim)
        if bad.size:
            i = int(bad[0])
            raise FormatError(f"{path}: record {i + 1} has dim {int(dims[i])}, expected {dim}")
    if len(buf) % record:
        raise FormatError(
            f"{path}: truncated record {n_full + 1} at byte offset {n_full * record} "
            f"({len(buf) - n_full * record} of {record} bytes)"
        )
    raw = np.frombuffer(buf, dtype=np.uint8).reshape(n_full, record)[:, 4:]
    return np.ascontiguousarray(raw).view(dtype).reshape(n_full, dim).astype(dtype.newbyteorder("="))


def write_vectors(path, matrix) -> None:
    """Write rows of ``matrix`` as records, casting to the path's precision."""
    dtype = _vector_dtype(path)
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {matrix.shape}")
    n, d = matrix.shape
    if n and d < 1:
        raise ValueError("cannot write vectors of dimension 0")
    out = np.empty((n, 4 + d * dtype.itemsize), dtype=np.uint8)
    out[:, :4] = np.frombuffer(struct.pack("<i", d), dtype=np.uint8)
    out[:, 4:] = np.ascontiguousarray(matrix, dtype=dtype).view(np.uint8).reshape(n, -1)
    Path(path).write_bytes(out.tobytes())


def vector_file_size(n: int, d: int, dtype=np.float32) -> int:
    return n * (4 + d * np.dtype(dtype).itemsize)


def _lines(path):
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            yield lineno, line.rstrip("\n").rstrip("\r")


def read_ids(path) -> list[str]:
    ids = []
    seen = set()
    for lineno, line in _lines(path):
        value = line.strip()
        if not value:
            raise FormatError(f"{path}:{lineno}: empty id line")
        if value in seen:
            raise FormatError(f"{path}:{lineno}: duplicate id {value!r}")
        seen.add(value)
        ids.append(value)
    return ids


def write_ids(path, ids) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for value in ids:
            fh.write(f"{value}\n")


def read_qrels(path) -> dict[str, dict[str, int]]:
    """Parse ``query_id 0 doc_id grade`` lines; blank lines are ignored."""
    qrels: dict[str, dict[str, int]] = {}
    for lineno, line in _lines(path):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 4:
            raise FormatError(f"{path}:{lineno}: expected 4 fields, got {len(fields)}")
        qid, _, doc, grade_text = fields
        try:
            grade = int(grade_text)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: grade {grade_text!r} is not an integer") from None
        if grade < 0:
            raise FormatError(f"{path}:{lineno}: negative grade {grade}")
        judged = qrels.setdefault(qid, {})
        if doc in judged:
            raise FormatError(f"{path}:{lineno}: duplicate judgment for ({qid}, {doc})")
        judged[doc] = grade
    return qrels


def write_qrels(path, qrels) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for qid, judged in qrels.items():
            for doc, grade in judged.items():
                fh.write(f"{qid} 0 {doc} {grade}\n")


def read_run(path) -> list[Ranking]:
    """Parse a six-column TREC run.

    Hits are re-sorted by score (ties by doc id). A rank column that puts a
    lower score above a higher one is accepted with a warning.
    """
    hits: dict[str, list[tuple[int, str, float]]] = {}
    seen: dict[str, set[str]] = {}
    for lineno, line in _lines(path):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 6:
            raise FormatError(f"{path}:{lineno}: expected 6 fields, got {len(fields)}")
        qid, _, doc, rank_text, score_text, _ = fields
        try:
            rank = int(rank_text)
            score = float(score_text)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: bad rank or score") from None
        if not np.isfinite(score):
            raise FormatError(f"{path}:{lineno}: non-finite score")
        docs = seen.setdefault(qid, set())
        if doc in docs:
            raise FormatError(f"{path}:{lineno}: duplicate doc {doc!r} for query {qid!r}")
        docs.add(doc)
        hits.setdefault(qid, []).append((rank, doc, score))

    rankings = []
    for qid, entries in hits.items():
        by_score = sorted(entries, key=lambda e: (-e[2], e[1]))
        rank_scores = [e[2] for e in sorted(entries, key=lambda e: e[0])]
        # reordering exact ties by doc id is expected and silent
        if any(a < b for a, b in zip(rank_scores, rank_scores[1:])):
            log.warning("%s: rank column for query %s disagrees with scores; re-ranked by score",
                        path, qid)
        rankings.append(Ranking(qid, tuple(ScoredHit(doc, score) for _, doc, score in by_score)))
    return rankings


def format_run(rankings, tag: str) -> str:
    lines = []
    for ranking in rankings:
        for rank, hit in enumerate(ranking.hits, start=1):
            lines.append(f"{ranking.query_id} Q0 {hit.doc_id} {rank} {hit.score:.6f} {tag}\n")
    return "".join(lines)


def write_run(path, rankings, tag: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_run(rankings, tag))


def save_pca(path, model: PcaModel) -> None:
    tag = model.source_tag.encode("utf-8")
    header = PCA_MAGIC + struct.pack("<IIQI", PCA_VERSION, model.dim, model.fitted_on, len(tag))
    body = (
        np.asarray(model.eigenvalues, dtype="<f8").tobytes()
        + np.asarray(model.basis, dtype="<f8").tobytes(order="F")
    )
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header + tag + body)
    os.replace(tmp, path)


def load_pca(path) -> PcaModel:
    buf = Path(path).read_bytes()
    if buf[:4] != PCA_MAGIC:
        raise FormatError(f"{path}: not a PCA model file (magic {buf[:4]!r})")
    fixed = struct.calcsize("<IIQI")
    if len(buf) < 4 + fixed:
        raise FormatError(f"{path}: truncated header")
    version, d, fitted_on, tag_len = struct.unpack_from("<IIQI", buf, 4)
    if version != PCA_VERSION:
        raise FormatError(f"{path}: unsupported model version {version}")
    offset = 4 + fixed
    expected = offset + tag_len + 8 * d + 8 * d * d
    if len(buf) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(buf)}")
    try:
        tag = buf[offset:offset + tag_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: source tag is not valid UTF-8 ({exc})") from None
    offset += tag_len
    eigenvalues = np.frombuffer(buf, dtype="<f8", count=d, offset=offset).astype(np.float64)
    offset += 8 * d
    basis = np.frombuffer(buf, dtype="<f8", count=d * d, offset=offset)
    basis = np.ascontiguousarray(basis.reshape((d, d), order="F"), dtype=np.float64)
    return PcaModel(eigenvalues, basis, int(fitted_on), tag)
