"""Select the compiled kernels when available, else the numpy fallback.

Set ``PRUNERANK_PURE_PYTHON=1`` to force the fallback.
"""
import os

from prunerank import _fallback

fallback = _fallback

if os.environ.get("PRUNERANK_PURE_PYTHON"):
    compiled = None
else:
    try:
        from prunerank import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else fallback
BACKEND = "cython" if compiled is not None else "numpy"


def available():
    """Map of backend name to kernel module, for tests and benchmarks."""
    found = {"numpy": fallback}
    if compiled is not None:
        found["cython"] = compiled
    return found
