"""Paired two-tailed Wilcoxon signed-rank test."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

EXACT_MAX_N = 25
ALPHA = 0.05


@dataclass(frozen=True)
class WilcoxonResult:
    n_effective: int
    statistic: float
    p_two_tailed: float
    exact: bool = True
    alpha: float = ALPHA

    @property
    def significant(self) -> bool:
        return self.p_two_tailed < self.alpha

    @property
    def significant_at_05(self) -> bool:
        return self.p_two_tailed < 0.05


def signed_ranks(diffs) -> tuple[np.ndarray, np.ndarray]:
    """Average ranks of ``|diffs|`` (1-based) and the sign of each difference."""
    diffs = np.asarray(diffs, dtype=np.float64)
    magnitude = np.abs(diffs)
    order = np.argsort(magnitude, kind="stable")
    ranks = np.empty(len(diffs), dtype=np.float64)
    sorted_mag = magnitude[order]
    start = 0
    while start < len(diffs):
        stop = start
        while stop + 1 < len(diffs) and sorted_mag[stop + 1] == sorted_mag[start]:
            stop += 1
        ranks[order[start:stop + 1]] = (start + stop) / 2.0 + 1.0
        start = stop + 1
    return ranks, np.sign(diffs)


def exact_lower_tail(doubled_ranks, doubled_stat: int) -> float:
    """P(W+ <= stat) under the null, by counting all 2^n sign assignments.

    Ranks are passed doubled so tied (half-integer) ranks stay integral; the
    count is built up one rank at a time, which enumerates the same
    assignments as brute force without materialising them.
    """
    counts = {0: 1}
    for r in doubled_ranks:
        step = dict(counts)
        for total, ways in counts.items():
            step[total + r] = step.get(total + r, 0) + ways
        counts = step
    hits = sum(ways for total, ways in counts.items() if total <= doubled_stat)
    return hits / 2 ** len(doubled_ranks)


def wilcoxon_signed_rank(x, y, alpha: float = ALPHA) -> WilcoxonResult:
    """Two-tailed paired test on ``x - y``; zero differences are dropped.

    Exact for up to 25 non-zero pairs (ties included), otherwise the normal
    approximation with tie and continuity corrections.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise ValueError(f"need two equal-length non-empty samples, got {x.shape} and {y.shape}")
    diffs = x - y
    diffs = diffs[diffs != 0.0]
    n = diffs.size
    if n == 0:
        return WilcoxonResult(0, 0.0, 1.0, True, alpha)

    ranks, signs = signed_ranks(diffs)
    w_plus = float(ranks[signs > 0].sum())
    w_minus = float(ranks[signs < 0].sum())
    statistic = min(w_plus, w_minus)

    if n <= EXACT_MAX_N:
        doubled = [int(round(2 * r)) for r in ranks]
        p = min(1.0, 2.0 * exact_lower_tail(doubled, int(round(2 * statistic))))
        return WilcoxonResult(n, statistic, p, True, alpha)

    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(np.abs(diffs), return_counts=True)
    variance = (n * (n + 1) * (2 * n + 1) - float(np.sum(tie_sizes**3 - tie_sizes)) / 2.0) / 24.0
    deviation = abs(w_plus - mean)
    # no continuity shift when the statistic sits exactly on the mean
    z = abs(deviation - 0.5) / math.sqrt(variance) if deviation else 0.0
    p = min(1.0, max(math.erfc(z / math.sqrt(2.0)), sys.float_info.min))
    return WilcoxonResult(n, statistic, p, False, alpha)
