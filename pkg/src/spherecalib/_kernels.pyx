# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled radial-atom accumulation kernel.

Same contract as spherecalib._kernels_py; see that module's docstring,
including the conditioning notes (chord-based distances, 2 sin^2(r/2) for
1 - cos r, Gauss-Legendre evaluation of I_k).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport acos, asin, cos, sin, sqrt

cnp.import_array()

KIND_PHI = 0
KIND_PSI = 1

_GL64 = np.polynomial.legendre.leggauss(64)
cdef double[::1] _GL_X = np.ascontiguousarray(_GL64[0])
cdef double[::1] _GL_W = np.ascontiguousarray(_GL64[1])


cdef double _incomplete_sine(int k, double r) nogil:
    # integral of sin^(k-1) over [0, r] by 64-point Gauss-Legendre
    cdef double half = 0.5 * r
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(_GL_X.shape[0]):
        acc += _GL_W[i] * sin(half * (_GL_X[i] + 1.0)) ** (k - 1)
    return half * acc


cdef inline double _psi_even(double sr, double omc, double[::1] acoef) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t ia
    for ia in range(acoef.shape[0], 0, -1):
        acc = (acc + acoef[ia - 1]) / omc
    return -sr * acc


def profile_batch(r_in, kinds_in, int k, acoef_in):
    """Profile values, derivatives and cot(r) for a batch of distances."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r = np.ascontiguousarray(r_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] kinds = np.ascontiguousarray(kinds_in, dtype=np.int8)
    cdef double[::1] acoef = np.ascontiguousarray(acoef_in, dtype=np.float64)
    cdef Py_ssize_t m = r.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] val = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] deriv = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cot = np.empty(m)
    cdef Py_ssize_t i
    cdef double sr, cr, hs
    for i in range(m):
        sr = sin(r[i])
        cr = cos(r[i])
        if kinds[i] == 0:
            val[i] = _incomplete_sine(k, r[i]) * sr ** (1 - k)
        else:
            hs = sin(0.5 * r[i])
            val[i] = _psi_even(sr, 2.0 * hs * hs, acoef)
        cot[i] = cr / sr
        deriv[i] = 1.0 - (k - 1) * val[i] * cot[i]
    return val, deriv, cot


def accumulate(q_in, centers_in, weights_in, kinds_in, int k, acoef_in):
    """Reduce an atom batch at q into (field, trace, M)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] q = np.ascontiguousarray(q_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] centers = np.ascontiguousarray(centers_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] weights = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] kinds = np.ascontiguousarray(kinds_in, dtype=np.int8)
    cdef double[::1] acoef = np.ascontiguousarray(acoef_in, dtype=np.float64)
    cdef Py_ssize_t m = centers.shape[0]
    cdef Py_ssize_t d = q.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] field = np.zeros(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mat = np.zeros((d, d))
    cdef double trace = 0.0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u = np.empty(d)
    cdef Py_ssize_t i, a, b
    cdef double ip, omip, chord2, diff, r, sr, cr, hs, val, cot, wf, coef
    for i in range(m):
        ip = 0.0
        chord2 = 0.0
        for a in range(d):
            ip += centers[i, a] * q[a]
            diff = q[a] - centers[i, a]
            chord2 += diff * diff
        if ip > 1.0:
            ip = 1.0
        elif ip < -1.0:
            ip = -1.0
        if ip > 0.5:
            # arccos near 1 forfeits half the digits; the chord does not
            r = 2.0 * asin(0.5 * sqrt(chord2))
            omip = 0.5 * chord2
        else:
            r = acos(ip)
            omip = 1.0 - ip
        sr = sin(r)
        cr = cos(r)
        # u = (<c,q> q - c)/sin r = ((q - c) - (1 - <c,q>) q)/sin r
        for a in range(d):
            u[a] = ((q[a] - centers[i, a]) - omip * q[a]) / sr
        if kinds[i] == 0:
            val = _incomplete_sine(k, r) * sr ** (1 - k)
        else:
            hs = sin(0.5 * r)
            val = _psi_even(sr, 2.0 * hs * hs, acoef)
        cot = cr / sr
        wf = weights[i] * val
        trace += k * wf * cot
        # f' - f cot with f' = 1 - (k-1) f cot
        coef = weights[i] * (1.0 - k * val * cot)
        for a in range(d):
            field[a] += wf * u[a]
            for b in range(d):
                mat[a, b] += coef * u[a] * u[b]
    return field, trace, mat
