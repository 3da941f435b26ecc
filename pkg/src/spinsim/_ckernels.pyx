# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the O(N^2) triangle sum and the lattice Fourier sum.

Both loops are parallel over the outer index and write one slot per index, so
the final reduction (done by the caller in a fixed order) is bit-stable.
"""
import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.math cimport cos, sin, sqrt


def k3_contributions(double[:, ::1] pos, double[::1] u, double[::1] field,
                     int nthreads=1):
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t i, j
    cdef double hx = field[0], hy = field[1], hz = field[2]
    cdef double dx, dy, dz, r2, r, c, acc
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
        acc = 0.0
        for j in range(n):
            if j == i:
                continue
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            dz = pos[j, 2] - pos[i, 2]
            r2 = dx * dx + dy * dy + dz * dz
            r = sqrt(r2)
            c = (dx * hx + dy * hy + dz * hz) / r
            acc = acc + u[j] * (1.0 - 3.0 * c * c) / (r2 * r)
        out[i] = u[i] * acc
    return out_arr


def fourier_sum(double[:, ::1] kpts, double[:, ::1] offsets, double[::1] weights,
                int nthreads=1):
    cdef Py_ssize_t m = kpts.shape[0]
    cdef Py_ssize_t n = offsets.shape[0]
    cdef Py_ssize_t a, b
    cdef double phase, re, im
    re_arr = np.zeros(m, dtype=np.float64)
    im_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] out_re = re_arr
    cdef double[::1] out_im = im_arr
    for a in prange(m, nogil=True, num_threads=nthreads, schedule="static"):
        re = 0.0
        im = 0.0
        for b in range(n):
            phase = (kpts[a, 0] * offsets[b, 0] + kpts[a, 1] * offsets[b, 1]
                     + kpts[a, 2] * offsets[b, 2])
            re = re + weights[b] * cos(phase)
            im = im + weights[b] * sin(phase)
        out_re[a] = re
        out_im[a] = im
    return re_arr + 1j * im_arr
