# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled counterparts of the routines in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, cos, sin

cnp.import_array()


def eval_modes(const double complex[:, ::1] amps, const long[:, ::1] kvecs, double kappa,
               const double[:, ::1] points):
    cdef Py_ssize_t P = points.shape[0]
    cdef Py_ssize_t nk = kvecs.shape[0]
    cdef Py_ssize_t p, q, a
    cdef long kmax = 0
    cdef long kk
    for q in range(nk):
        for a in range(3):
            kk = kvecs[q, a]
            if kk < 0:
                kk = -kk
            if kk > kmax:
                kmax = kk
    cdef Py_ssize_t width = 2 * kmax + 1
    # per-point tables of exp(i kappa m x_a) for m in [-kmax, kmax]
    cdef double[:, ::1] cr = np.empty((3, width))
    cdef double[:, ::1] ci = np.empty((3, width))
    out_arr = np.zeros((P, 3))
    cdef double[:, ::1] out = out_arr
    cdef double th, er, ei, tr, ti, zr, zi
    cdef long m
    for p in range(P):
        for a in range(3):
            for m in range(-kmax, kmax + 1):
                th = kappa * m * points[p, a]
                cr[a, m + kmax] = cos(th)
                ci[a, m + kmax] = sin(th)
        for q in range(nk):
            er = cr[0, kvecs[q, 0] + kmax]
            ei = ci[0, kvecs[q, 0] + kmax]
            tr = er * cr[1, kvecs[q, 1] + kmax] - ei * ci[1, kvecs[q, 1] + kmax]
            ti = er * ci[1, kvecs[q, 1] + kmax] + ei * cr[1, kvecs[q, 1] + kmax]
            zr = tr * cr[2, kvecs[q, 2] + kmax] - ti * ci[2, kvecs[q, 2] + kmax]
            zi = tr * ci[2, kvecs[q, 2] + kmax] + ti * cr[2, kvecs[q, 2] + kmax]
            for a in range(3):
                out[p, a] += amps[q, a].real * zr - amps[q, a].imag * zi
    return out_arr


cdef inline void _weights(double f, double* w) nogil:
    w[0] = -f * (f - 1.0) * (f - 2.0) / 6.0
    w[1] = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0
    w[2] = -(f + 1.0) * f * (f - 2.0) / 2.0
    w[3] = (f + 1.0) * f * (f - 1.0) / 6.0


def tricubic_clipped(const double[:, :, ::1] field, const double[:, ::1] idx):
    cdef Py_ssize_t M = field.shape[0]
    cdef Py_ssize_t P = idx.shape[0]
    out_arr = np.empty(P)
    cdef double[::1] out = out_arr
    cdef double wx[4]
    cdef double wy[4]
    cdef double wz[4]
    cdef Py_ssize_t ix[4]
    cdef Py_ssize_t iy[4]
    cdef Py_ssize_t iz[4]
    cdef Py_ssize_t p, i, j, k
    cdef long b0, b1, b2
    cdef double val, lo, hi, s, wij
    for p in range(P):
        b0 = <long>floor(idx[p, 0])
        b1 = <long>floor(idx[p, 1])
        b2 = <long>floor(idx[p, 2])
        _weights(idx[p, 0] - b0, wx)
        _weights(idx[p, 1] - b1, wy)
        _weights(idx[p, 2] - b2, wz)
        for i in range(4):
            ix[i] = ((b0 + i - 1) % M + M) % M
            iy[i] = ((b1 + i - 1) % M + M) % M
            iz[i] = ((b2 + i - 1) % M + M) % M
        val = 0.0
        lo = field[ix[1], iy[1], iz[1]]
        hi = lo
        for i in range(4):
            for j in range(4):
                wij = wx[i] * wy[j]
                for k in range(4):
                    s = field[ix[i], iy[j], iz[k]]
                    val += wij * wz[k] * s
                    if 1 <= i <= 2 and 1 <= j <= 2 and 1 <= k <= 2:
                        if s < lo:
                            lo = s
                        if s > hi:
                            hi = s
        if val < lo:
            val = lo
        if val > hi:
            val = hi
        out[p] = val
    return out_arr


def convolve_direct(const double[:, :, ::1] field, const long[:, ::1] offsets, const double[::1] weights):
    cdef Py_ssize_t M = field.shape[0]
    cdef Py_ssize_t S = offsets.shape[0]
    out_arr = np.zeros((M, M, M))
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, k, s, si, sj
    cdef long o0, o1, o2
    cdef double w
    for s in range(S):
        o0 = ((offsets[s, 0] % M) + M) % M
        o1 = ((offsets[s, 1] % M) + M) % M
        o2 = ((offsets[s, 2] % M) + M) % M
        w = weights[s]
        for i in range(M):
            si = (i - o0 + M) % M
            for j in range(M):
                sj = (j - o1 + M) % M
                # the wrap splits the innermost row into two contiguous runs
                for k in range(o2):
                    out[i, j, k] += w * field[si, sj, k - o2 + M]
                for k in range(o2, M):
                    out[i, j, k] += w * field[si, sj, k - o2]
    return out_arr
