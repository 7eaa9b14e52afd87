"""Robust transceiver design for full-duplex MIMO decode-and-forward relays.

The relay's residual self-interference channel is unknown apart from a bound
``T`` on its squared Frobenius norm.  The package computes the worst-case
interference allocation, the robust source/relay power design around it, and
Monte-Carlo comparisons against half-duplex relaying.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .channel import (FULL_DUPLEX, HALF_DUPLEX, SvdTriple, SystemConfig, covariance_from_modes,
                      sample_channel, singular_values_sq, svd)
from .errors import (FdRelayError, InvalidCovarianceError, InvalidInputError, NoCrossingError,
                     NoFeasibleStreamsError, UnsupportedSizeError)
from .montecarlo import (DesignKnobs, SweepReport, TrialRecord, antenna_split_study,
                         find_threshold, run_trials, sweep_t)
from .rates import (RatePair, aligned_rsi_channel, fd_rd_rate, fd_sr_rate, fd_sr_rate_binomial,
                    hd_optimal, known_rsi_upper_bound, logdet_rate, scalar_fd_sr_rate)
from .robust import (LowerBoundWarning, RobustDesignResult, WorstCaseSolution,
                     brute_force_robust, brute_force_worst_case, robust_design,
                     robust_design_from_gains, worst_case_inner)
from .waterfill import PowerAllocation, waterfill, waterfill_rate
