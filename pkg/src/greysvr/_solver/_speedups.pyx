# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled mirror of ``pure.solve`` for materialized kernel matrices.

This file must stay operation-for-operation equivalent to the pure solver:
same scan order, same tie-breaking, same rounding sequence.  The build
disables floating-point contraction so the arithmetic matches numpy's
non-fused evaluation exactly.
"""

import numpy as np

from libc.math cimport INFINITY

DEF QUAD_FLOOR = 1e-12


def solve(double[:, ::1] K, double[::1] diag, double[::1] y,
          double c, double eps, double tol, long max_iter):
    cdef Py_ssize_t n = y.shape[0]
    alpha_arr = np.zeros(n)
    alpha_star_arr = np.zeros(n)
    beta_arr = np.zeros(n)
    u_arr = np.zeros(n)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] alpha_star = alpha_star_arr
    cdef double[::1] beta = beta_arr
    cdef double[::1] u = u_arr

    cdef long it = 0
    cdef bint converged = 0
    cdef Py_ssize_t i, j, r, ri, rj, s
    cdef double m_up, m_low, violation, sc, resid
    cdef double quad, step, cap_i, cap_j, bi_old, bj_old, dbi, dbj
    violation = INFINITY

    with nogil:
        while True:
            # Scan the alpha block then the alpha-star block; strict comparisons
            # keep the lowest eligible index on ties, matching argmax/argmin over
            # the concatenated score vectors in the pure solver.
            m_up = -INFINITY
            m_low = INFINITY
            i = 0
            j = 0
            for r in range(n):
                resid = y[r] - u[r]
                if alpha[r] < c:
                    sc = resid - eps
                    if sc > m_up:
                        m_up = sc
                        i = r
                if alpha[r] > 0.0:
                    sc = resid - eps
                    if sc < m_low:
                        m_low = sc
                        j = r
            for r in range(n):
                resid = y[r] - u[r]
                if alpha_star[r] > 0.0:
                    sc = resid + eps
                    if sc > m_up:
                        m_up = sc
                        i = n + r
                if alpha_star[r] < c:
                    sc = resid + eps
                    if sc < m_low:
                        m_low = sc
                        j = n + r
            violation = m_up - m_low
            if violation <= tol:
                converged = 1
                break
            if it >= max_iter:
                break
            it += 1

            ri = i if i < n else i - n
            rj = j if j < n else j - n
            quad = diag[ri] + diag[rj] - 2.0 * K[ri, rj]
            if quad < QUAD_FLOOR:
                quad = QUAD_FLOOR
            step = violation / quad
            cap_i = (c - alpha[ri]) if i < n else alpha_star[ri]
            cap_j = alpha[rj] if j < n else (c - alpha_star[rj])
            if cap_i < step:
                step = cap_i
            if cap_j < step:
                step = cap_j

            bi_old = beta[ri]
            bj_old = beta[rj]
            if i < n:
                alpha[ri] = c if step == cap_i else alpha[ri] + step
            else:
                alpha_star[ri] = 0.0 if step == cap_i else alpha_star[ri] - step
            if j < n:
                alpha[rj] = 0.0 if step == cap_j else alpha[rj] - step
            else:
                alpha_star[rj] = c if step == cap_j else alpha_star[rj] + step
            beta[ri] = alpha[ri] - alpha_star[ri]
            beta[rj] = alpha[rj] - alpha_star[rj]
            dbi = beta[ri] - bi_old
            dbj = beta[rj] - bj_old
            for s in range(n):
                u[s] = u[s] + (dbi * K[ri, s] + dbj * K[rj, s])

    return alpha_arr, alpha_star_arr, beta_arr, u_arr, int(it), violation, bool(converged)
