"""Worst-case RSI power allocation and the nested robust transceiver design.

The RSI channel is taken aligned with the source-relay receive directions and
the relay transmit directions, which reduces the design to per-stream powers:

* inner loop -- the adversary spreads its trace budget ``T`` over the
  source-relay streams while the source water-fills against the resulting
  SINR gains;
* outer loop -- the relay water-fills over the relay-destination streams and
  geometrically backs off its budget, trading relay-destination rate for less
  self-interference.

:func:`brute_force_worst_case` and :func:`brute_force_robust` are exhaustive
grid oracles for small instances.
"""

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .channel import FULL_DUPLEX, singular_values_sq
from .errors import InvalidInputError, UnsupportedSizeError
from .rates import RatePair

DEFAULT_SHRINK = 0.95
DEFAULT_OUTER_TOL = 1e-4
DEFAULT_INNER_TOL = 1e-6
DEFAULT_MAX_OUTER = 200
DEFAULT_MAX_INNER = 500

# outer stopping rules: consecutive-rate plateau, or hop-rate balance
STOP_PLATEAU = "plateau"
STOP_BALANCE = "balance"
STOP_RULES = {STOP_PLATEAU: 0, STOP_BALANCE: 1}
DEFAULT_STOP_RULE = STOP_BALANCE


class LowerBoundWarning(UserWarning):
    """Aligned RSI directions are not provably worst for this antenna setup."""


@dataclass(frozen=True)
class WorstCaseSolution:
    sigr_sq: np.ndarray
    water_level_si: float
    gamma_s: np.ndarray
    rate_sr: float
    iterations: int = 0
    converged: bool = True
    # oracle only: worst-case error from evaluating on a grid
    resolution: float = 0.0


@dataclass(frozen=True)
class TraceRecord:
    l: int
    relay_budget: float
    r_sr: float
    r_rd: float
    r: float


@dataclass(frozen=True)
class RobustDesignResult:
    gamma_s: np.ndarray
    gamma_r: np.ndarray
    sigr_sq: np.ndarray
    relay_budget_used: float
    rates: RatePair
    trace: list = field(default_factory=list)
    best_index: int = 0
    water_level_si: float = 0.0
    inner_converged: bool = True
    lower_bound_only: bool = False


def _vector(x, name):
    a = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise InvalidInputError(f"{name} must be finite and non-negative")
    return a


def _coupled_gains(gamma_r_bar, n, coupled_count):
    g = np.zeros(n)
    k = min(int(coupled_count), n, gamma_r_bar.size)
    g[:k] = gamma_r_bar[:k]
    return g


def worst_case_inner(sig1_sq, sig_r_coupled_count, gamma_r_bar, p_src, t_bound,
                     tol=DEFAULT_INNER_TOL, max_iter=DEFAULT_MAX_INNER):
    """Worst-case RSI singular values against a fixed relay allocation.

    The adversary water-fills ``T`` over gains ``u = s1 * gs / gr`` and the
    source water-fills ``p_src`` over ``v = s1 / (1 + gr * sr)``, alternately,
    until the RSI singular values move by at most ``tol``.  Only the first
    ``sig_r_coupled_count`` streams carry relay power; ``gamma_r_bar`` is
    truncated or zero-padded to ``len(sig1_sq)``.

    The best-response map can cycle.  The returned iterate is the most damaging
    one visited, and ``converged`` is False when no fixed point was reached.
    """
    s1 = _vector(sig1_sq, "sig1_sq")
    gr = _coupled_gains(_vector(gamma_r_bar, "gamma_r_bar"), s1.size, sig_r_coupled_count)
    if not p_src > 0:
        raise InvalidInputError("p_src must be positive")
    if not t_bound >= 0:
        raise InvalidInputError("t_bound must be non-negative")
    if not tol > 0 or max_iter < 1:
        raise InvalidInputError("tol must be positive and max_iter >= 1")
    sr, tau, gs, rate, iters, conv = kernels.worst_case(
        s1, gr, float(p_src), float(t_bound), float(tol), int(max_iter))
    return WorstCaseSolution(np.asarray(sr, dtype=float), float(tau),
                             np.asarray(gs, dtype=float), float(rate), int(iters), bool(conv))


def simplex_grid(n, total, grid_points):
    """Points of ``{x >= 0, sum x = total}`` on a regular lattice.

    Returns ``(points, step)``; at least ``grid_points`` points for n >= 2.
    """
    if n == 1:
        return np.array([[total]], dtype=float), 0.0
    if n == 2:
        steps = grid_points - 1
    else:
        steps = 1
        while math.comb(steps + n - 1, n - 1) < grid_points:
            steps += 1
    pts = [c for c in itertools.product(range(steps + 1), repeat=n - 1) if sum(c) <= steps]
    lattice = np.array([list(c) + [steps - sum(c)] for c in pts], dtype=float)
    return lattice * (total / steps), total / steps


def brute_force_worst_case(sig1_sq, gamma_r_bar, p_src, t_bound, grid_points=2000):
    """Exhaustive min over RSI allocations with the source best-responding.

    Enumerates the full-budget face of the simplex (the rate only falls as any
    RSI entry grows), water-fills the source against each candidate, and
    returns the minimizing candidate.  ``resolution`` bounds how far the grid
    minimum can sit above the continuous one.
    """
    s1 = _vector(sig1_sq, "sig1_sq")
    gr = _vector(gamma_r_bar, "gamma_r_bar")
    n = s1.size
    if n > 3:
        raise UnsupportedSizeError(f"grid oracle supports at most 3 streams, got {n}")
    if grid_points < 100:
        raise InvalidInputError("grid_points must be at least 100")
    gr = _coupled_gains(gr, n, n)
    points, step = simplex_grid(n, float(t_bound), int(grid_points)) if t_bound > 0 else (np.zeros((1, n)), 0.0)
    best = None
    for x in points:
        v = s1 / (1.0 + gr * x)
        gs, _ = kernels.waterfill(v, float(p_src))
        rate = kernels.sum_rate(v, gs)
        if best is None or rate < best[0]:
            best = (rate, x, np.asarray(gs, dtype=float))
    rate, x, gs = best
    # d/d(sr_i) of the best-response rate is at most gr_i/ln2 (envelope bound);
    # the nearest lattice point is within l1 distance step (n=2) or 2(n-1)*step
    lipschitz = float(np.max(gr)) / math.log(2.0)
    reach = step if n <= 2 else 2 * (n - 1) * step
    return WorstCaseSolution(x.copy(), float("nan"), gs, float(rate), len(points), True,
                             resolution=lipschitz * reach)


def _check_knobs(shrink_c, outer_tol, inner_tol, max_outer, max_inner, stop_rule):
    if stop_rule not in STOP_RULES:
        raise InvalidInputError(f"stop_rule must be one of {sorted(STOP_RULES)}, got {stop_rule!r}")
    if not 0.9 <= shrink_c < 1.0:
        raise InvalidInputError(f"shrink_c must lie in [0.9, 1), got {shrink_c}")
    if not (outer_tol > 0 and inner_tol > 0):
        raise InvalidInputError("tolerances must be positive")
    if max_outer < 1 or max_inner < 1:
        raise InvalidInputError("iteration limits must be >= 1")


def robust_design_from_gains(sig1_sq, sig2_sq, p_src, p_relay, t_bound, n_coupled,
                             shrink_c=DEFAULT_SHRINK, outer_tol=DEFAULT_OUTER_TOL,
                             inner_tol=DEFAULT_INNER_TOL, max_outer=DEFAULT_MAX_OUTER,
                             max_inner=DEFAULT_MAX_INNER, stop_rule=DEFAULT_STOP_RULE,
                             lower_bound_only=False):
    """Robust design on squared singular values (descending) of both hops.

    ``stop_rule="plateau"`` ends the back-off once two consecutive end-to-end
    rates agree to ``outer_tol``.  ``"balance"`` keeps backing off until the
    relay-destination rate no longer exceeds the source-relay rate, which
    avoids stalling while the source-relay rate is flat in the relay budget.
    """
    _check_knobs(shrink_c, outer_tol, inner_tol, max_outer, max_inner, stop_rule)
    s1 = _vector(sig1_sq, "sig1_sq")
    s2 = _vector(sig2_sq, "sig2_sq")
    best, budgets, r_sr, r_rd, gs, gr, sr, tau, conv = kernels.robust(
        s1, s2, float(p_src), float(p_relay), float(t_bound), int(n_coupled),
        float(shrink_c), float(outer_tol), float(inner_tol), int(max_outer), int(max_inner),
        STOP_RULES[stop_rule])
    trace = [TraceRecord(l, float(b), float(a), float(d), float(min(a, d)))
             for l, (b, a, d) in enumerate(zip(budgets, r_sr, r_rd))]
    rec = trace[best]
    return RobustDesignResult(
        gamma_s=np.asarray(gs, dtype=float),
        gamma_r=np.asarray(gr, dtype=float),
        sigr_sq=np.asarray(sr, dtype=float),
        relay_budget_used=rec.relay_budget,
        rates=RatePair.full_duplex(rec.r_sr, rec.r_rd),
        trace=trace,
        best_index=int(best),
        water_level_si=float(tau),
        inner_converged=bool(conv),
        lower_bound_only=bool(lower_bound_only),
    )


def robust_design(h1, h2, cfg, shrink_c=DEFAULT_SHRINK, outer_tol=DEFAULT_OUTER_TOL,
                  inner_tol=DEFAULT_INNER_TOL, max_outer=DEFAULT_MAX_OUTER,
                  max_inner=DEFAULT_MAX_INNER, stop_rule=DEFAULT_STOP_RULE):
    """Robust FD transceiver design for channels ``h1`` (K_r x M) and ``h2`` (N x K_t).

    Returns the best iterate of the relay back-off trace.  When the
    relay-destination link has fewer degrees of freedom than the source-relay
    link the aligned adversary is not provably worst; the result is flagged
    ``lower_bound_only`` and a :class:`LowerBoundWarning` is emitted.
    """
    if cfg.mode != FULL_DUPLEX:
        raise InvalidInputError("robust_design requires a full-duplex configuration")
    if np.shape(h1) != (cfg.k_rx, cfg.m_src) or np.shape(h2) != (cfg.n_dst, cfg.k_tx):
        raise InvalidInputError("channel shapes do not match the configuration")
    if cfg.worst_case_is_lower_bound:
        warnings.warn("DoF_rd < DoF_sr: aligned RSI gives only a lower bound on adversarial damage",
                      LowerBoundWarning, stacklevel=2)
    return robust_design_from_gains(
        singular_values_sq(h1), singular_values_sq(h2), cfg.p_src, cfg.p_relay, cfg.t_bound,
        cfg.n_coupled, shrink_c, outer_tol, inner_tol, max_outer, max_inner, stop_rule,
        lower_bound_only=cfg.worst_case_is_lower_bound)


def brute_force_robust(sig1_sq, sig2_sq, p_src, p_relay, t_bound, n_coupled,
                       budget_points=200, grid_points=400):
    """Nested grid oracle for the full design (at most 3 source-relay streams).

    Scans relay budgets ``p_relay * k / budget_points`` for ``k = 1..budget_points``
    and, for each, the grid worst case of the source-relay rate; returns the
    best ``min(R_sr, R_rd)`` as a :class:`RatePair` plus the budget attaining it.
    """
    s1 = _vector(sig1_sq, "sig1_sq")
    s2 = _vector(sig2_sq, "sig2_sq")
    n = s1.size
    k = min(n_coupled, n, s2.size)
    best, best_budget = None, None
    for j in range(1, budget_points + 1):
        budget = p_relay * j / budget_points
        gamma_r, _ = kernels.waterfill(s2, budget)
        gbar = np.zeros(n)
        gbar[:k] = np.asarray(gamma_r)[:k]
        wc = brute_force_worst_case(s1, gbar, p_src, t_bound, grid_points)
        pair = RatePair.full_duplex(wc.rate_sr, kernels.sum_rate(s2, gamma_r))
        if best is None or pair.r_end2end > best.r_end2end:
            best, best_budget = pair, budget
    return best, best_budget
