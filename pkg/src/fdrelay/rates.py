"""Achievable-rate formulas for half- and full-duplex decode-and-forward relaying.

Matrix (log-det) forms take channels and covariances; scalarized forms take
squared singular values and per-stream powers.  All rates are in bits per
channel use with unit-variance noise.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .channel import as_matrix, covariance_from_modes, singular_values_sq, svd
from .errors import InvalidCovarianceError, InvalidInputError
from .waterfill import PowerAllocation

PSD_TOL = 1e-9


@dataclass(frozen=True)
class RatePair:
    r_sr: float
    r_rd: float
    r_end2end: float

    @classmethod
    def half_duplex(cls, r_sr, r_rd):
        return cls(float(r_sr), float(r_rd), 0.5 * min(r_sr, r_rd))

    @classmethod
    def full_duplex(cls, r_sr, r_rd):
        return cls(float(r_sr), float(r_rd), float(min(r_sr, r_rd)))


@dataclass(frozen=True)
class HdDesign:
    q_src: np.ndarray
    q_relay: np.ndarray
    alloc_src: PowerAllocation
    alloc_relay: PowerAllocation
    rate: RatePair


def _covariance(q, name):
    q = as_matrix(q, name)
    if q.shape[0] != q.shape[1]:
        raise InvalidInputError(f"{name} must be square")
    q = 0.5 * (q + q.conj().T)
    w, v = np.linalg.eigh(q)
    if w.min() < -PSD_TOL:
        raise InvalidCovarianceError(f"{name} has eigenvalue {w.min():.3e} < 0")
    if w.min() < 0:
        q = (v * np.clip(w, 0, None)) @ v.conj().T
    return q


def _logdet2(a):
    sign, logabs = np.linalg.slogdet(a)
    if sign.real <= 0:
        raise ArithmeticError("log-det of a matrix that is not positive definite")
    return logabs / np.log(2.0)


def _conformable(h, q, hname, qname):
    if h.shape[1] != q.shape[0]:
        raise InvalidInputError(f"{hname} has {h.shape[1]} columns but {qname} is {q.shape[0]}x{q.shape[0]}")


def logdet_rate(h, q):
    """``log2 det(I + H Q H^H)``."""
    h = as_matrix(h, "h")
    q = _covariance(q, "q")
    _conformable(h, q, "h", "q")
    a = np.eye(h.shape[0]) + h @ q @ h.conj().T
    return max(_logdet2(a), 0.0)


def fd_rd_rate(h2, q_relay):
    """Relay-destination rate; RSI does not reach the destination."""
    return logdet_rate(h2, q_relay)


def _fd_inputs(h1, q_src, h_rsi, q_relay):
    h1 = as_matrix(h1, "h1")
    hr = as_matrix(h_rsi, "h_rsi")
    q_s = _covariance(q_src, "q_src")
    q_r = _covariance(q_relay, "q_relay")
    _conformable(h1, q_s, "h1", "q_src")
    _conformable(hr, q_r, "h_rsi", "q_relay")
    if hr.shape[0] != h1.shape[0]:
        raise InvalidInputError("h_rsi must have as many rows as h1 (relay receive antennas)")
    return h1, q_s, hr, q_r


def fd_sr_rate(h1, q_src, h_rsi, q_relay):
    """Source-relay FD rate with the RSI treated as Gaussian noise.

    ``log2 |I + H1 Qs H1^H + Hr Qr Hr^H| - log2 |I + Hr Qr Hr^H|``.
    """
    h1, q_s, hr, q_r = _fd_inputs(h1, q_src, h_rsi, q_relay)
    eye = np.eye(h1.shape[0])
    interference = hr @ q_r @ hr.conj().T
    signal = h1 @ q_s @ h1.conj().T
    return max(_logdet2(eye + signal + interference) - _logdet2(eye + interference), 0.0)


def fd_sr_rate_binomial(h1, q_src, h_rsi, q_relay):
    """Same rate as :func:`fd_sr_rate`, via the push-through identity.

    ``log2 |I + A - A Hr (I + Qr Hr^H Hr)^{-1} Qr Hr^H|`` with ``A = H1 Qs H1^H``.
    Kept as an independent evaluation path for cross-checking.
    """
    h1, q_s, hr, q_r = _fd_inputs(h1, q_src, h_rsi, q_relay)
    a = h1 @ q_s @ h1.conj().T
    inner = np.eye(hr.shape[1]) + q_r @ hr.conj().T @ hr
    correction = a @ hr @ np.linalg.solve(inner, q_r @ hr.conj().T)
    return max(_logdet2(np.eye(h1.shape[0]) + a - correction), 0.0)


def _padded(*vectors):
    arrs = [np.asarray(v, dtype=float).ravel() for v in vectors]
    n = max(a.size for a in arrs)
    out = []
    for a in arrs:
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise InvalidInputError("entries must be finite and non-negative")
        out.append(np.pad(a, (0, n - a.size)))
    return out


def scalar_fd_sr_rate(sig1_sq, gamma_s, gamma_r, sigr_sq):
    """``sum_i log2(1 + s1_i gs_i / (1 + gr_i sr_i))`` on index-paired streams.

    Shorter vectors are zero-padded, so relay streams beyond the coupled ones
    simply carry no interference.
    """
    s1, gs, gr, sr = _padded(sig1_sq, gamma_s, gamma_r, sigr_sq)
    return float(np.sum(np.log2(1.0 + s1 * gs / (1.0 + gr * sr))))


def aligned_rsi_channel(h1, h2, sigr):
    """RSI channel ``L1 diag(sigr) R2^H`` aimed at the source-relay streams.

    ``sigr`` holds singular values (not squared); entries beyond the common
    rank are ignored.  Shape is ``K_r x K_t``.
    """
    l1 = svd(h1).left
    r2 = svd(h2).right
    sigr = np.asarray(sigr, dtype=float).ravel()
    k = min(l1.shape[1], r2.shape[1], sigr.size)
    return (l1[:, :k] * sigr[:k]) @ r2[:, :k].conj().T


def _hd_link(h, budget):
    trip = svd(h)
    # same gains as the robust path, so FD(T=0) = 2 HD holds bit for bit
    gains = singular_values_sq(h)
    powers, tau = kernels.waterfill(gains, float(budget))
    powers = np.asarray(powers, dtype=float)
    alloc = PowerAllocation(powers, float(tau), float(budget))
    rate = float(kernels.sum_rate(gains, powers))
    return covariance_from_modes(trip.right, powers), alloc, rate


def hd_optimal(h1, h2, p_src, p_relay):
    """Optimal HD design: each hop water-fills along its right singular basis.

    An all-zero channel yields zero power and zero rate on that hop.
    """
    if not (p_src > 0 and p_relay > 0):
        raise InvalidInputError("power budgets must be positive")
    q_s, alloc_s, r_sr = _hd_link(h1, p_src)
    q_r, alloc_r, r_rd = _hd_link(h2, p_relay)
    return HdDesign(q_s, q_r, alloc_s, alloc_r, RatePair.half_duplex(r_sr, r_rd))


def hd_rate_from_gains(sig1_sq, sig2_sq, p_src, p_relay):
    """HD rates from squared singular values (Monte-Carlo fast path)."""
    g1, _ = kernels.waterfill(sig1_sq, float(p_src))
    g2, _ = kernels.waterfill(sig2_sq, float(p_relay))
    return RatePair.half_duplex(kernels.sum_rate(sig1_sq, g1), kernels.sum_rate(sig2_sq, g2))


def known_rsi_upper_bound(sig1_sq, sig2_sq, sigr_sq, p_src, p_relay, n_coupled, budgets):
    """FD rate when the RSI singular values are known to the transmitters.

    With ``sigr_sq`` fixed (aligned directions), the relay tries every budget
    in ``budgets`` with water-filled powers, the source water-fills against
    the resulting SINR gains, and the best ``min(R_sr, R_rd)`` is kept.  Pass
    the budget trace of a robust design to get a bound that dominates it.
    """
    s1 = np.asarray(sig1_sq, dtype=float)
    s2 = np.asarray(sig2_sq, dtype=float)
    sr = np.asarray(sigr_sq, dtype=float)
    n = s1.size
    k = min(n_coupled, n, s2.size)
    best = None
    for budget in budgets:
        gamma_r, _ = kernels.waterfill(s2, float(budget))
        gbar = np.zeros(n)
        gbar[:k] = np.asarray(gamma_r)[:k]
        v = s1 / (1.0 + gbar * sr)
        gamma_s, _ = kernels.waterfill(v, float(p_src))
        pair = RatePair.full_duplex(kernels.sum_rate(v, gamma_s), kernels.sum_rate(s2, gamma_r))
        if best is None or pair.r_end2end > best.r_end2end:
            best = pair
    return best
