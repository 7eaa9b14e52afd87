"""Seeded Monte-Carlo experiments: rate-vs-uncertainty sweeps, HD/FD
mode-switching thresholds and relay antenna-split studies.

Reproducibility: trial ``k`` of a run with master seed ``s`` draws its
channels from ``PCG64(SeedSequence([s, k]))``, independent of how trials are
split across workers.  Per-trial results are stored by index and reduced
afterwards, so any worker count gives bit-identical aggregates.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .channel import SystemConfig, sample_channel, singular_values_sq
from .errors import InvalidInputError, NoCrossingError
from .rates import hd_rate_from_gains, known_rsi_upper_bound
from .robust import (DEFAULT_INNER_TOL, DEFAULT_MAX_INNER, DEFAULT_MAX_OUTER,
                     DEFAULT_OUTER_TOL, DEFAULT_SHRINK, DEFAULT_STOP_RULE,
                     robust_design_from_gains)

SEED_SCHEME = "numpy PCG64(SeedSequence(entropy=[master_seed, trial_index]))"


@dataclass(frozen=True)
class DesignKnobs:
    shrink_c: float = DEFAULT_SHRINK
    outer_tol: float = DEFAULT_OUTER_TOL
    inner_tol: float = DEFAULT_INNER_TOL
    max_outer: int = DEFAULT_MAX_OUTER
    max_inner: int = DEFAULT_MAX_INNER
    stop_rule: str = DEFAULT_STOP_RULE


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    seed: int
    r_hd: float
    r_fd_worst: float


@dataclass
class SweepReport:
    config: SystemConfig
    t_over_p_values: np.ndarray
    l_trials: int
    master_seed: int
    mean_rates_hd: np.ndarray
    mean_rates_fd: np.ndarray
    se_hd: np.ndarray
    se_fd: np.ndarray
    mean_rates_ub: np.ndarray = None
    se_ub: np.ndarray = None
    knobs: DesignKnobs = field(default_factory=DesignKnobs)
    seed_scheme: str = SEED_SCHEME


def trial_rng(master_seed, trial_index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(master_seed), int(trial_index)])))


def trial_channels(cfg, master_seed, trial_index):
    """``(H1, H2)`` of one trial: H1 is K_r x M, drawn first, then H2 is N x K_t."""
    rng = trial_rng(master_seed, trial_index)
    h1 = sample_channel(cfg.k_rx, cfg.m_src, rng, cfg.channel_variance)
    h2 = sample_channel(cfg.n_dst, cfg.k_tx, rng, cfg.channel_variance)
    return h1, h2


def trial_gains(cfg, master_seed, trial_index):
    """Squared singular values of the two hops for one trial."""
    h1, h2 = trial_channels(cfg, master_seed, trial_index)
    return singular_values_sq(h1), singular_values_sq(h2)


def power_reference(cfg):
    """The ``P`` in ``T/P``: the common source/relay budget."""
    return cfg.p_src


def _evaluate_chunk(args):
    cfg, master_seed, indices, t_values, knobs, with_ub = args
    nt = len(t_values)
    hd = np.empty(len(indices))
    fd = np.empty((len(indices), nt))
    ub = np.empty((len(indices), nt)) if with_ub else None
    for row, k in enumerate(indices):
        s1, s2 = trial_gains(cfg, master_seed, k)
        hd[row] = hd_rate_from_gains(s1, s2, cfg.p_src, cfg.p_relay).r_end2end
        for col, t in enumerate(t_values):
            res = robust_design_from_gains(
                s1, s2, cfg.p_src, cfg.p_relay, t, cfg.n_coupled, knobs.shrink_c,
                knobs.outer_tol, knobs.inner_tol, knobs.max_outer, knobs.max_inner,
                knobs.stop_rule)
            fd[row, col] = res.rates.r_end2end
            if with_ub:
                budgets = [rec.relay_budget for rec in res.trace]
                ub[row, col] = known_rsi_upper_bound(
                    s1, s2, res.sigr_sq, cfg.p_src, cfg.p_relay, cfg.n_coupled, budgets).r_end2end
    return indices, hd, fd, ub


def evaluate_trials(cfg, t_values, l_trials, master_seed, knobs=None, workers=1, with_ub=False):
    """Per-trial HD rates ``(L,)`` and FD (and optional UB) rates ``(L, len(t_values))``.

    ``t_values`` are absolute RSI bounds T.  All T values share each trial's
    channel realization.
    """
    if l_trials < 1:
        raise InvalidInputError("l_trials must be >= 1")
    knobs = knobs or DesignKnobs()
    t_values = [float(t) for t in t_values]
    hd = np.empty(l_trials)
    fd = np.empty((l_trials, len(t_values)))
    ub = np.empty((l_trials, len(t_values))) if with_ub else None
    workers = max(1, int(workers))
    n_chunks = 1 if workers == 1 else min(l_trials, 8 * workers)
    chunks = [list(c) for c in np.array_split(np.arange(l_trials), n_chunks) if len(c)]
    jobs = [(cfg, master_seed, c, t_values, knobs, with_ub) for c in chunks]
    if workers == 1:
        results = map(_evaluate_chunk, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_evaluate_chunk, jobs)
    try:
        for idx, h, f, u in results:
            hd[idx] = h
            fd[idx] = f
            if with_ub:
                ub[idx] = u
    finally:
        if workers != 1:
            pool.shutdown()
    return hd, fd, ub


def _mean_se(x, axis=0):
    n = x.shape[axis]
    mean = x.mean(axis=axis)
    se = x.std(axis=axis, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    return mean, se


def run_trials(cfg, l_trials, master_seed, knobs=None, workers=1):
    """HD and worst-case FD rate of every trial at ``cfg.t_bound``."""
    hd, fd, _ = evaluate_trials(cfg, [cfg.t_bound], l_trials, master_seed, knobs, workers)
    return [TrialRecord(k, int(master_seed), float(hd[k]), float(fd[k, 0])) for k in range(l_trials)]


def sweep_t(cfg, t_over_p, l_trials, master_seed, knobs=None, workers=1, upper_bound=False):
    """Mean HD / FD rates over a grid of ``T/P`` values (common random numbers)."""
    ratios = np.asarray(t_over_p, dtype=float).ravel()
    if np.any(ratios < 0) or np.any(np.diff(ratios) < 0):
        raise InvalidInputError("t_over_p must be non-negative and ascending")
    knobs = knobs or DesignKnobs()
    t_values = ratios * power_reference(cfg)
    hd, fd, ub = evaluate_trials(cfg, t_values, l_trials, master_seed, knobs, workers, upper_bound)
    mean_hd, se_hd = _mean_se(hd)
    mean_fd, se_fd = _mean_se(fd) if ratios.size else (np.zeros(0), np.zeros(0))
    report = SweepReport(
        config=cfg, t_over_p_values=ratios, l_trials=int(l_trials), master_seed=int(master_seed),
        mean_rates_hd=np.full(ratios.size, mean_hd), mean_rates_fd=mean_fd,
        se_hd=np.full(ratios.size, se_hd), se_fd=se_fd, knobs=knobs)
    if upper_bound:
        report.mean_rates_ub, report.se_ub = _mean_se(ub) if ratios.size else (np.zeros(0), np.zeros(0))
    return report


def find_threshold(cfg, t_lo, t_hi, l_trials, master_seed, tol=1e-3, knobs=None, workers=1,
                   max_steps=60):
    """``T*/P`` where the mean worst-case FD rate crosses the mean HD rate.

    ``t_lo`` and ``t_hi`` are ``T/P`` ratios bracketing the crossing.  Every
    bisection step reuses the same channel realizations.
    """
    if not (0 <= t_lo < t_hi):
        raise InvalidInputError("need 0 <= t_lo < t_hi")
    p = power_reference(cfg)

    def means(ratio):
        hd, fd, _ = evaluate_trials(cfg, [ratio * p], l_trials, master_seed, knobs, workers)
        return float(hd.mean()), float(fd[:, 0].mean())

    hd, fd_lo = means(t_lo)
    _, fd_hi = means(t_hi)
    if not (fd_lo > hd > fd_hi):
        raise NoCrossingError(
            f"no FD/HD crossing in [{t_lo}, {t_hi}]: FD={fd_lo:.6g}..{fd_hi:.6g}, HD={hd:.6g}",
            fd_lo, fd_hi, hd)
    lo, hi = float(t_lo), float(t_hi)
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        _, fd_mid = means(mid)
        if abs(fd_mid - hd) <= tol:
            return mid
        if fd_mid > hd:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def antenna_split_study(m, n, total_relay_antennas, splits, t_over_p, l_trials, master_seed,
                        p=5.0, channel_variance=2.0, knobs=None, workers=1):
    """One sweep per ``(K_t, K_r)`` split of a fixed relay antenna total.

    All splits share the master seed.  Every split is validated before any
    sweep runs.
    """
    splits = [(int(k_tx), int(k_rx)) for k_tx, k_rx in splits]
    if not splits:
        raise InvalidInputError("need at least one split")
    for k_tx, k_rx in splits:
        if k_tx + k_rx != total_relay_antennas:
            raise InvalidInputError(
                f"split ({k_tx}, {k_rx}) does not sum to {total_relay_antennas}")
    cfgs = [SystemConfig(m, k_tx, k_rx, n, p, p, 0.0, channel_variance=channel_variance)
            for k_tx, k_rx in splits]
    return [sweep_t(cfg, t_over_p, l_trials, master_seed, knobs, workers) for cfg in cfgs]


def oracle_instances(n_streams, count, master_seed, p=5.0, channel_variance=2.0,
                     t_over_p_range=(0.04, 2.44)):
    """Random inner-problem instances ``(sig1_sq, gamma_r_bar, p, T)`` for oracle checks.

    Instance ``i`` draws square ``n_streams`` channels for both hops from
    :func:`trial_rng` ``(master_seed, i)``; the relay water-fills ``p`` over
    the second hop and ``T/p`` is uniform on ``t_over_p_range``.
    """
    out = []
    for i in range(int(count)):
        rng = trial_rng(master_seed, i)
        h1 = sample_channel(n_streams, n_streams, rng, channel_variance)
        h2 = sample_channel(n_streams, n_streams, rng, channel_variance)
        s1 = singular_values_sq(h1)
        gamma_r, _ = kernels.waterfill(singular_values_sq(h2), float(p))
        t = p * rng.uniform(*t_over_p_range)
        out.append((s1, np.asarray(gamma_r, dtype=float), float(p), float(t)))
    return out
