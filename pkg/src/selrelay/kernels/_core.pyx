# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte Carlo trial kernels (same contracts as ``_fallback``)."""

import numpy as np
from libc.math cimport erfc, sqrt

SR, SCR, ASR = 0, 1, 2


def effective_snr(const double[::1] g0, const double[:, ::1] sr, const double[:, ::1] rd, int scheme):
    cdef Py_ssize_t n = sr.shape[0], m = sr.shape[1], t, r, bi
    cdef double bv, v, a, b
    beta_arr = np.empty(n)
    best_arr = np.empty(n, dtype=np.intp)
    g1_arr = np.empty(n)
    cdef double[::1] beta = beta_arr
    cdef Py_ssize_t[::1] best = best_arr
    cdef double[::1] g1 = g1_arr
    with nogil:
        for t in range(n):
            a = sr[t, 0]
            b = rd[t, 0]
            bv = a if a < b else b
            bi = 0
            for r in range(1, m):
                a = sr[t, r]
                b = rd[t, r]
                v = a if a < b else b
                if v > bv:
                    bv = v
                    bi = r
            best[t] = bi
            g1[t] = bv
            if scheme == 1:
                beta[t] = g0[t] + bv
            elif scheme == 2:
                beta[t] = g0[t] if g0[t] > bv else bv
            else:
                beta[t] = bv
    return beta_arr, best_arr, g1_arr


def conditional_ber(const double[::1] beta):
    cdef Py_ssize_t n = beta.shape[0], t
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    with nogil:
        for t in range(n):
            out[t] = 0.5 * erfc(sqrt(beta[t]))
    return out_arr


def genie_errors(const double[::1] beta, const double[::1] noise):
    cdef Py_ssize_t n = beta.shape[0], t
    out_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    with nogil:
        for t in range(n):
            out[t] = 1 if sqrt(beta[t]) + noise[t] < 0.0 else 0
    return out_arr


def df_errors(const double[::1] g0, const double[:, ::1] sr, const double[:, ::1] rd,
              const Py_ssize_t[::1] best, const double[::1] g1, const double[:, ::1] noise, int scheme):
    cdef Py_ssize_t n = sr.shape[0], t, r
    cdef double a0, a_sr, a_rd, sym, y_sd, y_rd, z
    out_arr = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] out = out_arr
    with nogil:
        for t in range(n):
            r = best[t]
            a0 = sqrt(g0[t])
            a_sr = sqrt(sr[t, r])
            a_rd = sqrt(rd[t, r])
            sym = -1.0 if a_sr + noise[t, 1] < 0.0 else 1.0
            y_sd = a0 + noise[t, 0]
            y_rd = a_rd * sym + noise[t, 2]
            if scheme == 1:
                z = a0 * y_sd + a_rd * y_rd
            elif scheme == 2:
                z = y_sd if g0[t] > g1[t] else y_rd
            else:
                z = y_rd
            out[t] = 1 if z < 0.0 else 0
    return out_arr
