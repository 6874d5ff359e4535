# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dynamic-programming kernels.

Mirrors :mod:`ppgloss._pycore` function for function; see there for the
recursions.  All kernels release the GIL.
"""

import numpy as np

from libc.math cimport exp, log, INFINITY


# exp() below this argument is denormal or zero; glibc takes a slow path
# there, and the contribution is below double resolution anyway.
DEF EXP_CUTOFF = -700.0


cdef inline double _exp(double z) noexcept nogil:
    if z < EXP_CUTOFF:
        return 0.0
    return exp(z)


cdef inline double _softmin3(double a, double b, double c, double gamma) noexcept nogil:
    cdef double m = a
    if b < m:
        m = b
    if c < m:
        m = c
    if m == INFINITY:
        return INFINITY
    if gamma == 0.0:
        return m
    return m - gamma * log(_exp(-(a - m) / gamma) + _exp(-(b - m) / gamma)
                           + _exp(-(c - m) / gamma))


def soft_dtw_forward(const double[:, ::1] D, double gamma):
    cdef Py_ssize_t n = D.shape[0], m = D.shape[1], i, j
    R_arr = np.full((n + 2, m + 2), np.inf)
    cdef double[:, ::1] R = R_arr
    R[0, 0] = 0.0
    with nogil:
        for i in range(1, n + 1):
            for j in range(1, m + 1):
                R[i, j] = D[i - 1, j - 1] + _softmin3(
                    R[i - 1, j - 1], R[i - 1, j], R[i, j - 1], gamma)
    return R_arr


def soft_dtw_backward(const double[:, ::1] D, const double[:, ::1] R_in, double gamma):
    cdef Py_ssize_t n = D.shape[0], m = D.shape[1], i, j
    cdef double a, b, c, r
    Dp_arr = np.zeros((n + 2, m + 2))
    R_arr = np.array(R_in, dtype=np.float64, copy=True)
    E_arr = np.zeros((n + 2, m + 2))
    cdef double[:, ::1] Dp = Dp_arr
    cdef double[:, ::1] R = R_arr
    cdef double[:, ::1] E = E_arr
    with nogil:
        for i in range(n):
            for j in range(m):
                Dp[i + 1, j + 1] = D[i, j]
        for i in range(n + 2):
            R[i, m + 1] = -INFINITY
        for j in range(m + 2):
            R[n + 1, j] = -INFINITY
        R[n + 1, m + 1] = R[n, m]
        E[n + 1, m + 1] = 1.0
        for j in range(m, 0, -1):
            for i in range(n, 0, -1):
                r = R[i, j]
                a = _exp((R[i + 1, j] - r - Dp[i + 1, j]) / gamma)
                b = _exp((R[i, j + 1] - r - Dp[i, j + 1]) / gamma)
                c = _exp((R[i + 1, j + 1] - r - Dp[i + 1, j + 1]) / gamma)
                E[i, j] = E[i + 1, j] * a + E[i, j + 1] * b + E[i + 1, j + 1] * c
    return E_arr[1:n + 1, 1:m + 1].copy()


def soft_dtw_forward_weights(const double[:, ::1] D, double gamma, bint symmetric=False):
    cdef Py_ssize_t n = D.shape[0], m = D.shape[1], i, j, j0
    cdef double a, b, c, lo, ea, eb, ec, tot
    R_arr = np.full((n + 2, m + 2), np.inf)
    W_arr = np.zeros((n + 2, m + 2, 3))
    cdef double[:, ::1] R = R_arr
    cdef double[:, :, ::1] W = W_arr
    if symmetric and n != m:
        raise ValueError("symmetric mode needs a square cost matrix")
    R[0, 0] = 0.0
    with nogil:
        for i in range(1, n + 1):
            j0 = i if symmetric else 1
            for j in range(j0, m + 1):
                a = R[i - 1, j - 1]
                b = R[i - 1, j]
                c = R[i, j - 1]
                lo = a
                if b < lo:
                    lo = b
                if c < lo:
                    lo = c
                # the minimum contributes exp(0) = 1; skip its exp call
                ea = 1.0 if a == lo else _exp(-(a - lo) / gamma)
                eb = 1.0 if b == lo else _exp(-(b - lo) / gamma)
                ec = 1.0 if c == lo else _exp(-(c - lo) / gamma)
                tot = ea + eb + ec
                R[i, j] = D[i - 1, j - 1] + lo - gamma * log(tot)
                W[i, j, 0] = ea / tot
                W[i, j, 1] = eb / tot
                W[i, j, 2] = ec / tot
                if symmetric and j != i:
                    R[j, i] = R[i, j]
                    W[j, i, 0] = W[i, j, 0]
                    W[j, i, 1] = W[i, j, 2]
                    W[j, i, 2] = W[i, j, 1]
    return R_arr, W_arr


def soft_dtw_backward_weights(const double[:, :, ::1] W):
    cdef Py_ssize_t n = W.shape[0] - 2, m = W.shape[1] - 2, i, j
    E_arr = np.zeros((n + 2, m + 2))
    cdef double[:, ::1] E = E_arr
    with nogil:
        E[n, m] = 1.0
        for i in range(n, 0, -1):
            for j in range(m, 0, -1):
                if i == n and j == m:
                    continue
                E[i, j] = (E[i + 1, j] * W[i + 1, j, 1] + E[i, j + 1] * W[i, j + 1, 2]
                           + E[i + 1, j + 1] * W[i + 1, j + 1, 0])
    return E_arr[1:n + 1, 1:m + 1].copy()


def frechet_dp(const double[:, ::1] dist):
    cdef Py_ssize_t p = dist.shape[0], q = dist.shape[1], i, j
    cdef double best
    C_arr = np.empty((p, q))
    cdef double[:, ::1] C = C_arr
    with nogil:
        C[0, 0] = dist[0, 0]
        for i in range(1, p):
            C[i, 0] = C[i - 1, 0] if C[i - 1, 0] > dist[i, 0] else dist[i, 0]
        for j in range(1, q):
            C[0, j] = C[0, j - 1] if C[0, j - 1] > dist[0, j] else dist[0, j]
        for i in range(1, p):
            for j in range(1, q):
                best = C[i - 1, j - 1]
                if C[i - 1, j] < best:
                    best = C[i - 1, j]
                if C[i, j - 1] < best:
                    best = C[i, j - 1]
                C[i, j] = best if best > dist[i, j] else dist[i, j]
    return C_arr[p - 1, q - 1]
