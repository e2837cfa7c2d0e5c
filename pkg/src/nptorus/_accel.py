"""Backend selection and thread limits.

``NPT_DISABLE_NUMBA=1`` forces the pure-numpy kernels even when numba is
importable. ``NPT_THREADS`` caps numba's thread pool and the Python-level
worker pools.
"""

from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

if numba is not None and "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    # an old system TBB only produces a warning; try OpenMP first
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = numba is not None and not _flag("NPT_DISABLE_NUMBA")


def thread_count() -> int:
    raw = os.environ.get("NPT_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"NPT_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def configure_threads() -> int:
    """Apply NPT_THREADS to numba; returns the number of threads in use."""
    n = thread_count()
    if USE_NUMBA:
        n = min(n, numba.config.NUMBA_NUM_THREADS)
        numba.set_num_threads(n)
    return n


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
