"""Pure numpy fallback for the compiled kernels in ``_ckernels.pyx``.

Signatures and results match the compiled versions; ``nthreads`` is accepted
and ignored.
"""
import numpy as np

_CHUNK = 256


def k3_contributions(pos, u, field, nthreads=1):
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    field = np.asarray(field, dtype=np.float64)
    n = len(pos)
    out = np.zeros(n)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        d = pos[None, :, :] - pos[start:stop, None, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        idx = np.arange(start, stop)
        r2[idx - start, idx] = 1.0
        r = np.sqrt(r2)
        c = (d @ field) / r
        g = (1.0 - 3.0 * c * c) / (r2 * r)
        g[idx - start, idx] = 0.0
        out[start:stop] = u[start:stop] * (g @ u)
    return out


def fourier_sum(kpts, offsets, weights, nthreads=1):
    kpts = np.ascontiguousarray(kpts, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    out = np.empty(len(kpts), dtype=np.complex128)
    for start in range(0, len(kpts), _CHUNK):
        phase = kpts[start:start + _CHUNK] @ offsets.T
        out[start:start + _CHUNK] = np.cos(phase) @ weights + 1j * (np.sin(phase) @ weights)
    return out
