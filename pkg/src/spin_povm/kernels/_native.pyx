# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for per-sample POVM statistics.

Single pass over (sample, element) pairs with no large temporaries; the
interface mirrors kernels._reference exactly.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double _ipow(double p, long n) nogil:
    cdef double out = 1.0
    cdef double base = p
    cdef long k = n
    while k > 0:
        if k & 1:
            out *= base
        k >>= 1
        if k:
            base *= base
    return out


def povm_moments_block(states, elements, weights, ncopies):
    """Per-sample fidelity and unity sums; see kernels._reference."""
    cdef const double complex[:, ::1] s = np.ascontiguousarray(states, dtype=np.complex128)
    cdef const double complex[:, ::1] e = np.ascontiguousarray(elements, dtype=np.complex128)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef long n = ncopies
    cdef Py_ssize_t nsamp = s.shape[0]
    cdef Py_ssize_t dim = s.shape[1]
    cdef Py_ssize_t nel = e.shape[0]

    fid_arr = np.empty(nsamp, dtype=np.float64)
    uni_arr = np.empty(nsamp, dtype=np.float64)
    cdef double[::1] fid = fid_arr
    cdef double[::1] uni = uni_arr

    cdef Py_ssize_t i, r, k
    cdef double complex ov
    cdef double p, pn, f, u
    with nogil:
        for i in range(nsamp):
            f = 0.0
            u = 0.0
            for r in range(nel):
                ov = 0.0
                for k in range(dim):
                    ov += s[i, k].conjugate() * e[r, k]
                p = ov.real * ov.real + ov.imag * ov.imag
                pn = _ipow(p, n)
                u += w[r] * pn
                f += w[r] * pn * p
            fid[i] = f
            uni[i] = u
    return fid_arr, uni_arr


def povm_probability_block(states, elements, weights, ncopies):
    """(B, n) outcome probabilities; see kernels._reference."""
    cdef const double complex[:, ::1] s = np.ascontiguousarray(states, dtype=np.complex128)
    cdef const double complex[:, ::1] e = np.ascontiguousarray(elements, dtype=np.complex128)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef long n = ncopies
    cdef Py_ssize_t nsamp = s.shape[0]
    cdef Py_ssize_t dim = s.shape[1]
    cdef Py_ssize_t nel = e.shape[0]

    probs_arr = np.empty((nsamp, nel), dtype=np.float64)
    cdef double[:, ::1] probs = probs_arr

    cdef Py_ssize_t i, r, k
    cdef double complex ov
    cdef double p
    with nogil:
        for i in range(nsamp):
            for r in range(nel):
                ov = 0.0
                for k in range(dim):
                    ov += s[i, k].conjugate() * e[r, k]
                p = ov.real * ov.real + ov.imag * ov.imag
                probs[i, r] = w[r] * _ipow(p, n)
    return probs_arr
