"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Every arithmetic step matches the compiled code in type and order, so the
two backends produce bit-identical results. Reductions use ``np.cumsum``
because it accumulates strictly left to right.
"""
import math

import numpy as np

_SCORE_CHUNK = 4096


def _sequential_sum(values):
    if values.size == 0:
        return 0.0
    return float(np.cumsum(values)[-1])


def _off_norm(a):
    upper = a[np.triu_indices(a.shape[0], k=1)]
    return math.sqrt(2.0 * _sequential_sum(upper * upper))


def round_robin(d):
    """Pair schedule for one sweep: ``d' - 1`` rounds of disjoint ``(p, q)`` pairs.

    Circle method over ``d'`` = d rounded up to even; pairs touching the
    padding slot are dropped, so every unordered pair appears exactly once.
    Shared by both backends.
    """
    width = d + (d % 2)
    players = list(range(width))
    rounds = []
    for _ in range(width - 1):
        pairs = []
        for i in range(width // 2):
            a, b = players[i], players[width - 1 - i]
            if a < d and b < d:
                pairs.append((min(a, b), max(a, b)))
        pairs.sort()
        rounds.append(np.asarray(pairs, dtype=np.intp).reshape(-1, 2))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(s, tol, max_sweeps):
    a = np.array(s, dtype=np.float64, order="C")
    d = a.shape[0]
    vt = np.eye(d, dtype=np.float64)
    fro = math.sqrt(_sequential_sum((a * a).ravel()))
    upper = np.triu_indices(d, k=1)
    schedule = round_robin(d)
    sweep = 0
    off = _off_norm(a)
    while off > tol * fro and sweep < max_sweeps:
        for pairs in schedule:
            if pairs.shape[0] == 0:
                continue
            p, q = pairs[:, 0], pairs[:, 1]
            apq = a[p, q].copy()
            app = a[p, p].copy()
            aqq = a[q, q].copy()
            live = apq != 0.0
            safe = np.where(live, apq, 1.0)
            # a huge tau overflows to inf and yields t == 0, as in the compiled kernel
            with np.errstate(divide="ignore", over="ignore"):
                tau = (aqq - app) / (2.0 * safe)
                root = np.sqrt(1.0 + tau * tau)
                t = np.where(tau >= 0.0, 1.0 / (tau + root), -1.0 / (-tau + root))
            t = np.where(live, t, 0.0)
            c = np.where(live, 1.0 / np.sqrt(1.0 + t * t), 1.0)
            sn = np.where(live, t * c, 0.0)
            cc, ss = c[:, None], sn[:, None]
            for m in (a, vt):
                x = m[p, :]
                y = m[q, :]
                m[p, :] = cc * x - ss * y
                m[q, :] = ss * x + cc * y
            x = a[:, p]
            y = a[:, q]
            a[:, p] = x * c - y * sn
            a[:, q] = x * sn + y * c
            a[p, p] = app - t * apq
            a[q, q] = aqq + t * apq
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[upper[1], upper[0]] = a[upper]
        sweep += 1
        off = _off_norm(a)
    return np.diagonal(a).copy(), np.ascontiguousarray(vt.T), sweep, off


def score_rows(matrix, q):
    n, d = matrix.shape
    if q.shape[0] != d:
        raise ValueError(f"query length {q.shape[0]} does not match index dim {d}")
    out = np.empty(n, dtype=np.float64)
    stop = d - d % 4
    for start in range(0, n, _SCORE_CHUNK):
        block = matrix[start:start + _SCORE_CHUNK].astype(np.float64)
        lanes = np.zeros((4, block.shape[0]), dtype=np.float64)
        for j in range(0, stop, 4):
            for lane in range(4):
                lanes[lane] += block[:, j + lane] * q[j + lane]
        for lane in range(d - stop):
            lanes[lane] += block[:, stop + lane] * q[stop + lane]
        out[start:start + block.shape[0]] = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3])
    return out
