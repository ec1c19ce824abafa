"""Front end of the window-sum engine.

Builds zero-padded prefix (summed-area) tables and answers axis-aligned
window queries in O(2^d) table lookups.  The batched corner-sum loop is the
hot kernel: a compiled Cython implementation is used when available, with a
pure-NumPy fallback selected at import time.  Set CHARGELAB_PURE=1 to force
the fallback (used by the benchmark to compare both).
"""

from __future__ import annotations

import os

import numpy as np

from . import _winpure

if os.environ.get("CHARGELAB_PURE"):
    _impl = _winpure
    KERNEL = "pure"
else:
    try:
        from . import _winkernel as _impl

        KERNEL = "cython"
    except ImportError:
        _impl = _winpure
        KERNEL = "pure"

__all__ = ["KERNEL", "build_prefix", "index_range", "box_window_sums",
           "box_window_sum_direct"]

# relative tie tolerance for strict window-boundary comparisons: a cell
# center sitting exactly on the open window's boundary is excluded,
# deterministically, even under float rounding
_TIE = 1e-9


def build_prefix(values: np.ndarray) -> np.ndarray:
    """Zero-padded cumulative-sum table over all axes."""
    d = values.ndim
    prefix = np.zeros(tuple(n + 1 for n in values.shape), dtype=float)
    core = prefix[tuple(slice(1, None) for _ in range(d))]
    core[...] = values
    for axis in range(d):
        np.cumsum(prefix, axis=axis, out=prefix)
    return prefix


def index_range(lo: float, delta: float, n: int, a: float, b: float):
    """Half-open cell index range [i0, i1) of centers strictly inside (a, b).

    Centers are lo + (i + 0.5) * delta.  Boundary ties are broken towards
    exclusion with a small relative tolerance, so that the result is stable
    when window edges land exactly on cell centers.
    """
    if b <= a:
        return 0, 0
    t0 = (a - lo) / delta - 0.5
    t1 = (b - lo) / delta - 0.5
    i0 = int(np.floor(t0 + _TIE)) + 1
    i1 = int(np.ceil(t1 - _TIE))
    i0 = min(max(i0, 0), n)
    i1 = min(max(i1, 0), n)
    if i1 < i0:
        i1 = i0
    return i0, i1


def index_ranges_batch(lo: float, delta: float, n: int,
                       a: np.ndarray, b: np.ndarray):
    """Vectorized index_range for arrays of window bounds."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t0 = (a - lo) / delta - 0.5
    t1 = (b - lo) / delta - 0.5
    i0 = np.floor(t0 + _TIE).astype(np.int64) + 1
    i1 = np.ceil(t1 - _TIE).astype(np.int64)
    np.clip(i0, 0, n, out=i0)
    np.clip(i1, 0, n, out=i1)
    np.maximum(i1, i0, out=i1)
    empty = b <= a
    i1[empty] = i0[empty]
    return i0, i1


def overlap_weights(lo: float, delta: float, n: int, a: float, b: float):
    """Cell range [j0, j1) overlapping [a, b] plus per-cell overlap lengths.

    Unlike index_range, boundary cells enter with their fractional overlap,
    so summing density * weight integrates the piecewise-constant density
    exactly over the interval (O(delta^2) error against a smooth density).
    """
    if b <= a:
        return 0, 0, np.zeros(0)
    j0 = max(int(np.floor((a - lo) / delta)), 0)
    j1 = min(int(np.ceil((b - lo) / delta)), n)
    if j1 <= j0:
        return j0, j0, np.zeros(0)
    edges = lo + np.arange(j0, j1 + 1) * delta
    w = np.minimum(b, edges[1:]) - np.maximum(a, edges[:-1])
    return j0, j1, np.clip(w, 0.0, None)


def box_window_sums(prefix: np.ndarray, i0s, i1s) -> np.ndarray:
    """Batched corner sums; dispatches to the selected kernel."""
    return _impl.box_window_sums(prefix, i0s, i1s)


def box_window_sum_direct(values: np.ndarray, i0s, i1s) -> float:
    """Single window by direct slicing (no prefix table); oracle path."""
    sl = tuple(slice(int(a), int(b)) for a, b in zip(np.ravel(i0s), np.ravel(i1s)))
    return float(values[sl].sum())
