"""Pure-NumPy implementation of the d-dimensional window-sum kernel.

Used as the fallback when the compiled extension is unavailable (or when
CHARGELAB_PURE=1 is set).  Same contract as chargelab._winkernel.
"""

from __future__ import annotations

import itertools

import numpy as np


def box_window_sums(prefix: np.ndarray, i0s, i1s) -> np.ndarray:
    """Window sums from a zero-padded prefix table.

    prefix has shape (n_1+1, ..., n_d+1) with prefix[j] the sum of values
    over cells < j in every axis.  i0s/i1s are per-axis int arrays giving,
    for each query along that axis, the half-open cell index range of the
    window.  Returns the array of sums, one entry per query combination.
    """
    d = prefix.ndim
    out_shape = tuple(len(a) for a in i0s)
    out = np.zeros(out_shape, dtype=float)
    for corner in itertools.product((0, 1), repeat=d):
        sign = -1.0 if (d - sum(corner)) % 2 else 1.0
        idx = [i1s[k] if corner[k] else i0s[k] for k in range(d)]
        if d == 1:
            out += sign * prefix[idx[0]]
        else:
            out += sign * prefix[np.ix_(*idx)]
    return out
