"""Complex-matrix primitives, SVD scalarization and random channel generation.

Channels are plain ``numpy`` complex128 arrays.  Dimensions follow the signal
model used throughout the package:

* ``H1`` (source -> relay) is ``K_r x M``,
* ``H2`` (relay -> destination) is ``N x K_t``,
* the residual self-interference channel is ``K_r x K_t``.

Noise is unit variance at every receiver, so powers are SNRs.
"""

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError

HALF_DUPLEX = "half_duplex"
FULL_DUPLEX = "full_duplex"
MODES = (HALF_DUPLEX, FULL_DUPLEX)


class SvdTriple(NamedTuple):
    """Thin SVD ``h = left @ diag(singular_values) @ right^H``."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, power budgets and the RSI uncertainty bound.

    ``channel_variance`` is the per-entry mean power ``E|h|^2`` used when
    channels are drawn for Monte-Carlo runs.  A value of 2.0 (unit-variance
    real and imaginary parts) reproduces the published rate curves; 1.0 is the
    textbook CN(0, 1) normalization.
    """

    m_src: int
    k_tx: int
    k_rx: int
    n_dst: int
    p_src: float = 5.0
    p_relay: float = 5.0
    t_bound: float = 0.0
    mode: str = FULL_DUPLEX
    channel_variance: float = 2.0

    def __post_init__(self):
        for name in ("m_src", "k_tx", "k_rx", "n_dst"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {value!r}")
        if not (self.p_src > 0 and self.p_relay > 0):
            raise InvalidInputError("power budgets must be positive")
        if not (self.t_bound >= 0) or not np.isfinite(self.t_bound):
            raise InvalidInputError("t_bound must be finite and non-negative")
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (self.channel_variance > 0):
            raise InvalidInputError("channel_variance must be positive")

    @property
    def dof_sr(self):
        return min(self.m_src, self.k_rx)

    @property
    def dof_rd(self):
        return min(self.k_tx, self.n_dst)

    @property
    def n_coupled(self):
        """Streams on which relay power can leak into the source-relay link."""
        return min(self.m_src, self.k_tx, self.dof_sr, self.dof_rd)

    @property
    def worst_case_is_lower_bound(self):
        # aligned RSI directions are only provably worst when DoF_rd >= DoF_sr
        return self.dof_rd < self.dof_sr

    def with_t(self, t_bound):
        return replace(self, t_bound=float(t_bound))


def as_matrix(h, name="matrix"):
    """Validate and return ``h`` as a finite 2-D complex128 array."""
    arr = np.asarray(h, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def svd(h):
    """Thin SVD with singular values sorted in descending order."""
    h = as_matrix(h, "h")
    left, s, right_h = np.linalg.svd(h, full_matrices=False)
    return SvdTriple(left, s, right_h.conj().T)


def singular_values_sq(h):
    """Squared singular values (descending) -- the per-stream channel gains."""
    return np.linalg.svd(as_matrix(h, "h"), compute_uv=False) ** 2


def sample_channel(rows, cols, rng, variance=1.0):
    """Draw a ``rows x cols`` matrix of i.i.d. circularly-symmetric Gaussians.

    Each entry has ``E|h|^2 = variance``, split evenly between the real and
    imaginary parts.  ``rng`` is a ``numpy.random.Generator``.
    """
    if int(rows) != rows or int(cols) != cols or rows < 1 or cols < 1:
        raise InvalidInputError("rows and cols must be positive integers")
    scale = np.sqrt(variance / 2.0)
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return scale * (re + 1j * im)


def covariance_from_modes(basis, powers):
    """Build ``Q = U diag(powers) U^H`` from the leading columns of ``basis``."""
    basis = as_matrix(basis, "basis")
    powers = np.asarray(powers, dtype=float).ravel()
    if np.any(powers < 0) or not np.all(np.isfinite(powers)):
        raise InvalidInputError("powers must be finite and non-negative")
    if powers.size > basis.shape[1]:
        raise InvalidInputError("more powers than basis columns")
    u = basis[:, : powers.size]
    q = (u * powers) @ u.conj().T
    return 0.5 * (q + q.conj().T)
