# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; statement-for-statement twin of ``_pykernels``."""

from libc.math cimport log2, sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

import numpy as np


cdef double _waterfill(const double* gains, int n, double budget,
                       double* powers, double* scratch) noexcept nogil:
    # scratch must hold n doubles; returns the water level
    cdef int i, j, k = 0, m = 0, active
    cdef double x, acc, tau, p
    for i in range(n):
        powers[i] = 0.0
        if gains[i] > 0.0:
            x = 1.0 / gains[i]
            j = m
            while j > 0 and scratch[j - 1] > x:
                scratch[j] = scratch[j - 1]
                j -= 1
            scratch[j] = x
            m += 1
    if m == 0 or budget <= 0.0:
        return 0.0
    acc = 0.0
    tau = 0.0
    for k in range(m):
        acc += scratch[k]
        tau = (budget + acc) / (k + 1)
        if k + 1 == m or scratch[k + 1] >= tau:
            break
    active = k + 1
    for i in range(n):
        if gains[i] > 0.0:
            x = 1.0 / gains[i]
            if tau - x > 0.0:
                p = budget
                for j in range(active):
                    p += scratch[j] - x
                p /= active
                if p > 0.0:
                    powers[i] = p
    return tau


cdef double _sum_rate(const double* gains, const double* powers, int n) noexcept nogil:
    cdef int i
    cdef double acc = 0.0
    for i in range(n):
        acc += log2(1.0 + gains[i] * powers[i])
    return acc


cdef double _dist(const double* a, const double* b, int n) noexcept nogil:
    cdef int i
    cdef double d, acc = 0.0
    for i in range(n):
        d = a[i] - b[i]
        acc += d * d
    return sqrt(acc)


cdef int _worst_case(const double* s1, const double* gbar, int n, double p_src,
                     double t_bound, double tol, int max_iter,
                     double* best_sr, double* best_tau, double* best_gs,
                     double* best_rate, int* converged, double* work) noexcept nogil:
    # work must hold 8*n doubles; returns the iteration count
    cdef double* gs = work
    cdef double* sr = work + n
    cdef double* u = work + 2 * n
    cdef double* v = work + 3 * n
    cdef double* sig = work + 4 * n
    cdef double* prev = work + 5 * n
    cdef double* prev2 = work + 6 * n
    cdef double* scratch = work + 7 * n
    cdef int i, q = 0, have_prev2 = 0, coupled = 0, any_u
    cdef double tau_si, rate

    _waterfill(s1, n, p_src, gs, scratch)
    for i in range(n):
        if gbar[i] > 0.0:
            coupled = 1
    if t_bound <= 0.0 or not coupled:
        for i in range(n):
            best_sr[i] = 0.0
            best_gs[i] = gs[i]
        best_tau[0] = 0.0
        best_rate[0] = _sum_rate(s1, gs, n)
        converged[0] = 1
        return 0

    for i in range(n):
        prev[i] = 1.0
        best_sr[i] = 0.0
        best_gs[i] = gs[i]
    best_tau[0] = 0.0
    best_rate[0] = INFINITY
    converged[0] = 0
    while q < max_iter:
        q += 1
        any_u = 0
        for i in range(n):
            if gbar[i] > 0.0:
                u[i] = s1[i] * gs[i] / gbar[i]
            else:
                u[i] = 0.0
            if u[i] > 0.0:
                any_u = 1
        if any_u:
            tau_si = _waterfill(u, n, t_bound, sr, scratch)
        else:
            tau_si = 0.0
            for i in range(n):
                sr[i] = 0.0
        for i in range(n):
            v[i] = s1[i] / (1.0 + gbar[i] * sr[i])
        _waterfill(v, n, p_src, gs, scratch)
        rate = _sum_rate(v, gs, n)
        if rate < best_rate[0]:
            best_rate[0] = rate
            best_tau[0] = tau_si
            memcpy(best_sr, sr, n * sizeof(double))
            memcpy(best_gs, gs, n * sizeof(double))
        for i in range(n):
            sig[i] = sqrt(sr[i])
        if _dist(sig, prev, n) <= tol:
            converged[0] = 1
            break
        if have_prev2 and _dist(sig, prev2, n) <= tol:
            break
        memcpy(prev2, prev, n * sizeof(double))
        have_prev2 = 1
        memcpy(prev, sig, n * sizeof(double))
    return q


cdef inline double[::1] _vec(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def waterfill(gains, double budget):
    cdef double[::1] g = _vec(gains)
    cdef int n = g.shape[0]
    out = np.zeros(n)
    cdef double[::1] p = out
    cdef double* scratch = <double*> malloc((n + 1) * sizeof(double))
    cdef double tau
    try:
        tau = _waterfill(&g[0] if n else NULL, n, budget, &p[0] if n else NULL, scratch)
    finally:
        free(scratch)
    return out, tau


def sum_rate(gains, powers):
    cdef double[::1] g = _vec(gains)
    cdef double[::1] p = _vec(powers)
    if g.shape[0] == 0:
        return 0.0
    return _sum_rate(&g[0], &p[0], g.shape[0])


def worst_case(sig1_sq, gbar, double p_src, double t_bound, double tol, int max_iter):
    cdef double[::1] s1 = _vec(sig1_sq)
    cdef double[::1] gb = _vec(gbar)
    cdef int n = s1.shape[0]
    sr_out = np.zeros(n)
    gs_out = np.zeros(n)
    cdef double[::1] sr = sr_out
    cdef double[::1] gs = gs_out
    cdef double tau = 0.0, rate = 0.0
    cdef int conv = 0, iters
    cdef double* work = <double*> malloc((8 * n + 1) * sizeof(double))
    try:
        iters = _worst_case(&s1[0], &gb[0], n, p_src, t_bound, tol, max_iter,
                            &sr[0], &tau, &gs[0], &rate, &conv, work)
    finally:
        free(work)
    return sr_out, tau, gs_out, rate, iters, bool(conv)


def robust(sig1_sq, sig2_sq, double p_src, double p_relay, double t_bound,
           int n_coupled, double c, double outer_tol, double inner_tol,
           int max_outer, int max_inner, int stop_rule):
    cdef double[::1] s1 = _vec(sig1_sq)
    cdef double[::1] s2 = _vec(sig2_sq)
    cdef int n = s1.shape[0], m = s2.shape[0]
    cdef int ncp = min(n_coupled, n, m)
    cdef int i, l, count = 0, best = -1, conv = 0, best_conv = 0
    cdef double pbar = p_relay, prev = 0.0, r, rsr, rrd, tau, best_tau = 0.0
    cdef double best_r = -INFINITY
    cdef int have_prev = 0
    budgets = np.zeros(max_outer)
    r_sr = np.zeros(max_outer)
    r_rd = np.zeros(max_outer)
    gs_out = np.zeros(n)
    gr_out = np.zeros(m)
    sr_out = np.zeros(n)
    cdef double[::1] b_v = budgets
    cdef double[::1] rsr_v = r_sr
    cdef double[::1] rrd_v = r_rd
    cdef double[::1] gs_best = gs_out
    cdef double[::1] gr_best = gr_out
    cdef double[::1] sr_best = sr_out
    cdef double* work = <double*> malloc((11 * n + 2 * m + 2) * sizeof(double))
    cdef double* gbar = work + 8 * n
    cdef double* sr = work + 9 * n
    cdef double* gs = work + 10 * n
    cdef double* gr = work + 11 * n
    cdef double* scratch = work + 11 * n + m
    try:
        with nogil:
            for l in range(max_outer):
                _waterfill(&s2[0], m, pbar, gr, scratch)
                for i in range(n):
                    gbar[i] = gr[i] if i < ncp else 0.0
                _worst_case(&s1[0], gbar, n, p_src, t_bound, inner_tol, max_inner,
                            sr, &tau, gs, &rsr, &conv, work)
                rrd = _sum_rate(&s2[0], gr, m)
                r = rsr if rsr < rrd else rrd
                b_v[count] = pbar
                rsr_v[count] = rsr
                rrd_v[count] = rrd
                count += 1
                if r > best_r:
                    best_r = r
                    best = count - 1
                    best_tau = tau
                    best_conv = conv
                    memcpy(&gs_best[0], gs, n * sizeof(double))
                    memcpy(&gr_best[0], gr, m * sizeof(double))
                    memcpy(&sr_best[0], sr, n * sizeof(double))
                if stop_rule == 1:
                    if rrd - rsr <= outer_tol:
                        break
                elif have_prev and fabs(r - prev) <= outer_tol:
                    break
                prev = r
                have_prev = 1
                pbar = c * pbar
    finally:
        free(work)
    return (best, budgets[:count].tolist(), r_sr[:count].tolist(), r_rd[:count].tolist(),
            gs_out, gr_out, sr_out, best_tau, bool(best_conv))
