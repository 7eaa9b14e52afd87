"""Water-filling over parallel scalar channels.

One primitive serves three roles: source power, relay power, and the
adversarial allocation of the RSI budget.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import InvalidInputError, NoFeasibleStreamsError


@dataclass(frozen=True)
class PowerAllocation:
    """Per-stream powers, the water level they sit under, and their budget."""

    powers: np.ndarray
    water_level: float
    budget: float

    @property
    def active(self):
        return self.powers > 0


def _gains(gains):
    g = np.asarray(gains, dtype=float).ravel()
    if g.size == 0 or not np.all(np.isfinite(g)):
        raise InvalidInputError("gains must be a non-empty finite vector")
    if np.any(g < 0):
        raise InvalidInputError("gains must be non-negative")
    return g


def waterfill(gains, budget, tol=1e-12):
    """Maximize ``sum log2(1 + g_i p_i)`` subject to ``sum p_i <= budget``.

    The water level is located exactly: inverse gains are sorted and the
    active set grown until the next stream would sit above the water line,
    after which ``tau = (budget + sum_active 1/g) / k``.  Streams with equal
    gain always receive equal power.

    Parameters
    ----------
    gains : array_like
        Non-negative per-stream gains; zeros are carried with zero power.
    budget : float
        Total power, strictly positive.
    tol : float
        Relative tolerance on the budget residual that the result is checked
        against (widened to a few ulps of the water level when ``1/g`` dwarfs
        the budget).

    Returns
    -------
    PowerAllocation
    """
    g = _gains(gains)
    if not np.isfinite(budget) or budget <= 0:
        raise InvalidInputError(f"budget must be positive, got {budget!r}")
    if not np.any(g > 0):
        raise NoFeasibleStreamsError("all gains are zero")
    powers, tau = kernels.waterfill(g, float(budget))
    powers = np.asarray(powers, dtype=float)
    residual = abs(powers.sum() - budget)
    # tau - 1/g cancels when 1/g >> budget, so allow a few ulps of tau too
    slack = max(tol * budget, 8.0 * np.finfo(float).eps * tau) * g.size
    if residual > slack:
        raise ArithmeticError(f"water-filling budget residual {residual:.3e} exceeds tolerance")
    return PowerAllocation(powers, float(tau), float(budget))


def waterfill_rate(gains, allocation):
    """``sum log2(1 + g_i p_i)`` for an allocation (bits per channel use)."""
    g = _gains(gains)
    powers = allocation.powers if isinstance(allocation, PowerAllocation) else allocation
    p = np.asarray(powers, dtype=float).ravel()
    if p.shape != g.shape:
        raise InvalidInputError(f"length mismatch: {g.size} gains vs {p.size} powers")
    return float(kernels.sum_rate(g, p))
