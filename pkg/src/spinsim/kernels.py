"""Kernel backend selection.

The compiled Cython module is used when it has been built; otherwise the
numpy fallback is loaded. Set ``SPINSIM_PURE_PYTHON=1`` to force the fallback
and ``SPINSIM_THREADS`` to cap the number of OpenMP threads.
"""
import os

import numpy as np

from . import _pykernels

if os.environ.get("SPINSIM_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"


def n_threads():
    """Thread cap from ``SPINSIM_THREADS`` (default 1)."""
    raw = os.environ.get("SPINSIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def k3_contributions(pos, u, field):
    """Per-site terms ``u_i * sum_{j != i} g(r_j - r_i) u_j`` of the triangle sum."""
    return _impl.k3_contributions(
        np.ascontiguousarray(pos, dtype=np.float64),
        np.ascontiguousarray(u, dtype=np.float64),
        np.ascontiguousarray(field, dtype=np.float64),
        n_threads(),
    )


def fourier_sum(kpts, offsets, weights):
    """``sum_b w_b exp(i k_a . r_b)`` for every row ``k_a`` of ``kpts``."""
    return _impl.fourier_sum(
        np.ascontiguousarray(np.atleast_2d(kpts), dtype=np.float64),
        np.ascontiguousarray(offsets, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        n_threads(),
    )
