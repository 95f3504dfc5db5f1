# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grid-sweep kernels; mirrors ``_grid_py``."""

import numpy as np

from libc.math cimport exp, log1p


cdef inline double softplus(double z) noexcept nogil:
    # log(1 + e^z) without overflow
    if z > 0.0:
        return z + log1p(exp(-z))
    return log1p(exp(z))


def pair_factor_extrema(double b0, double b1, double g,
                        double lo, double hi, Py_ssize_t n):
    cdef double step = (hi - lo) / (n - 1) if n > 1 else 0.0
    cdef double delta = b1 - b0
    cdef double s, t0, f
    cdef double fmin = 0.0, fmax = 0.0
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            s = lo + step * i
            t0 = softplus(s + b0) - softplus(s + b1) + g
            f = softplus(t0 + delta) - softplus(t0)
            if i == 0:
                fmin = f
                fmax = f
            elif f < fmin:
                fmin = f
            elif f > fmax:
                fmax = f
    return fmin, fmax


def effects_trace(theta, shifts):
    cdef double b_x0 = theta[0], b_xs0 = theta[1]
    cdef double b_x1 = theta[2], b_xs1 = theta[3]
    cdef double g_x = theta[4], g_xs = theta[5]
    cdef double d_x = b_x1 - b_x0
    cdef double d_xs = b_xs1 - b_xs0

    s_arr = np.ascontiguousarray(shifts, dtype=np.float64)
    nde_arr = np.empty_like(s_arr)
    nie_arr = np.empty_like(s_arr)

    cdef double[::1] s = s_arr
    cdef double[::1] nde = nde_arr
    cdef double[::1] nie = nie_arr
    cdef Py_ssize_t i, n = s.shape[0]
    cdef double h_x, h_xs, cross, active, reference
    with nogil:
        for i in range(n):
            h_x = softplus(s[i] + b_x0) - softplus(s[i] + b_x1)
            h_xs = softplus(s[i] + b_xs0) - softplus(s[i] + b_xs1)
            cross = softplus(h_x + g_xs + d_x) - softplus(h_x + g_xs)
            active = softplus(h_x + g_x + d_x) - softplus(h_x + g_x)
            reference = softplus(h_xs + g_xs + d_xs) - softplus(h_xs + g_xs)
            nde[i] = (b_x0 - b_xs0) + cross - reference
            nie[i] = active - cross
    return nde_arr, nie_arr
