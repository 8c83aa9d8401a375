import numpy as np
import pytest

from prunerank import _backend, index, linalg


@pytest.fixture(params=sorted(_backend.available()))
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    kernels = _backend.available()[request.param]
    monkeypatch.setattr(linalg, "kernels", kernels)
    monkeypatch.setattr(index, "kernels", kernels)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)


def random_psd(rng, d, n=None):
    n = n if n is not None else 2 * d + 3
    x = rng.standard_normal((n, d))
    return x.T @ x


def random_symmetric(rng, d):
    a = rng.standard_normal((d, d))
    return (a + a.T) / 2


def brute_force_wilcoxon_p(x, y):
    """Two-tailed signed-rank p by listing all 2^n sign assignments."""
    from prunerank.stats import signed_ranks

    d = np.asarray(x, float) - np.asarray(y, float)
    d = d[d != 0]
    if d.size == 0:
        return 1.0
    ranks, signs = signed_ranks(d)
    stat = min(ranks[signs > 0].sum(), ranks[signs < 0].sum())
    bits = (np.arange(2 ** d.size)[:, None] >> np.arange(d.size)) & 1
    w_plus = bits @ ranks
    return min(1.0, 2 * np.count_nonzero(w_plus <= stat + 1e-9) / 2 ** d.size)
