"""Pure-Python hot kernels.

Reference implementation of the inner loops and the fallback used when the
compiled ``_ckernels`` extension is unavailable.  Every function mirrors its
Cython twin statement for statement (same summation order, ``math.log2``), so
both backends agree to the last bit on the platforms we test.

All arguments are sequences of floats; results are lists / floats.
"""

import math


def waterfill(gains, budget):
    """Exact water-filling: returns ``(powers, water_level)``.

    Zero gains get zero power.  With no positive gain or a non-positive budget
    the allocation is all zeros and the water level is 0.
    """
    n = len(gains)
    powers = [0.0] * n
    inv = sorted(1.0 / g for g in gains if g > 0.0)
    m = len(inv)
    if m == 0 or budget <= 0.0:
        return powers, 0.0
    acc = 0.0
    tau = 0.0
    k = 0
    for k in range(m):
        acc += inv[k]
        tau = (budget + acc) / (k + 1)
        if k + 1 == m or inv[k + 1] >= tau:
            break
    active = k + 1
    for i in range(n):
        g = gains[i]
        if g > 0.0:
            x = 1.0 / g
            if tau - x > 0.0:
                # tau - x summed as differences of inverse gains: no cancellation
                # against a large tau when 1/g dwarfs the budget
                p = budget
                for j in range(active):
                    p += inv[j] - x
                p /= active
                if p > 0.0:
                    powers[i] = p
    return powers, tau


def sum_rate(gains, powers):
    acc = 0.0
    for i in range(len(gains)):
        acc += math.log2(1.0 + gains[i] * powers[i])
    return acc


def _dist(a, b):
    acc = 0.0
    for i in range(len(a)):
        d = a[i] - b[i]
        acc += d * d
    return math.sqrt(acc)


def worst_case(sig1_sq, gbar, p_src, t_bound, tol, max_iter):
    """Alternating source / adversary water-filling for fixed relay powers.

    Returns ``(sigr_sq, tau_si, gamma_s, rate, iterations, converged)`` for the
    most damaging iterate visited (each iterate pairs the adversary's move with
    the source's exact best response).
    """
    n = len(sig1_sq)
    zeros = [0.0] * n
    gamma_s, _ = waterfill(sig1_sq, p_src)
    coupled = False
    for i in range(n):
        if gbar[i] > 0.0:
            coupled = True
    if t_bound <= 0.0 or not coupled:
        return zeros, 0.0, gamma_s, sum_rate(sig1_sq, gamma_s), 0, True

    prev = [1.0] * n
    prev2 = None
    best_sr, best_tau, best_gs, best_rate = zeros, 0.0, gamma_s, math.inf
    converged = False
    q = 0
    u = [0.0] * n
    v = [0.0] * n
    sig = [0.0] * n
    while q < max_iter:
        q += 1
        any_u = False
        for i in range(n):
            if gbar[i] > 0.0:
                u[i] = sig1_sq[i] * gamma_s[i] / gbar[i]
            else:
                u[i] = 0.0
            if u[i] > 0.0:
                any_u = True
        if any_u:
            sr, tau_si = waterfill(u, t_bound)
        else:
            sr, tau_si = list(zeros), 0.0
        for i in range(n):
            v[i] = sig1_sq[i] / (1.0 + gbar[i] * sr[i])
        gamma_s, _ = waterfill(v, p_src)
        rate = sum_rate(v, gamma_s)
        if rate < best_rate:
            best_sr, best_tau, best_gs, best_rate = sr, tau_si, gamma_s, rate
        for i in range(n):
            sig[i] = math.sqrt(sr[i])
        if _dist(sig, prev) <= tol:
            converged = True
            break
        # a repeated state means the best-response map has entered a 2-cycle
        if prev2 is not None and _dist(sig, prev2) <= tol:
            break
        prev2 = prev
        prev = list(sig)
    return best_sr, best_tau, best_gs, best_rate, q, converged


def robust(sig1_sq, sig2_sq, p_src, p_relay, t_bound, n_coupled, c,
           outer_tol, inner_tol, max_outer, max_inner, stop_rule):
    """Outer relay-budget back-off loop around :func:`worst_case`.

    ``stop_rule`` 0 stops once consecutive end-to-end rates differ by at most
    ``outer_tol``; 1 stops once the relay-destination rate no longer exceeds
    the source-relay rate by more than ``outer_tol``.

    Returns ``(best_index, budgets, r_sr, r_rd, gamma_s, gamma_r, sigr_sq,
    tau_si, inner_converged)`` where the vectors belong to the best iterate.
    """
    n = len(sig1_sq)
    budgets = []
    r_sr = []
    r_rd = []
    best = -1
    best_r = -math.inf
    best_state = None
    pbar = p_relay
    prev = None
    ncp = min(n_coupled, n, len(sig2_sq))
    for _ in range(max_outer):
        gamma_r, _ = waterfill(sig2_sq, pbar)
        gbar = [0.0] * n
        for i in range(ncp):
            gbar[i] = gamma_r[i]
        sr, tau_si, gs, rsr, _, conv = worst_case(sig1_sq, gbar, p_src, t_bound,
                                                  inner_tol, max_inner)
        rrd = sum_rate(sig2_sq, gamma_r)
        r = rsr if rsr < rrd else rrd
        budgets.append(pbar)
        r_sr.append(rsr)
        r_rd.append(rrd)
        if r > best_r:
            best_r = r
            best = len(budgets) - 1
            best_state = (gs, gamma_r, sr, tau_si, conv)
        if stop_rule == 1:
            if rrd - rsr <= outer_tol:
                break
        elif prev is not None and abs(r - prev) <= outer_tol:
            break
        prev = r
        pbar = c * pbar
    gs, gamma_r, sr, tau_si, conv = best_state
    return best, budgets, r_sr, r_rd, gs, gamma_r, sr, tau_si, conv
