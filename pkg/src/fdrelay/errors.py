"""Exception hierarchy shared across the package."""


class FdRelayError(Exception):
    """Base class for all package errors."""


class InvalidInputError(FdRelayError, ValueError):
    """Raised for malformed arguments (non-finite, negative, wrong shape)."""


class InvalidCovarianceError(InvalidInputError):
    """Raised when a covariance matrix is not Hermitian positive semidefinite."""


class NoFeasibleStreamsError(FdRelayError, ValueError):
    """Raised when water-filling is asked to allocate over all-zero gains."""


class UnsupportedSizeError(FdRelayError, ValueError):
    """Raised when an exhaustive routine is asked for a size it cannot enumerate."""


class NoCrossingError(FdRelayError):
    """Raised when a threshold bracket does not straddle the HD rate.

    Carries the mean FD rates at both bracket ends and the HD mean.
    """

    def __init__(self, message, fd_lo, fd_hi, hd):
        super().__init__(message)
        self.fd_lo = fd_lo
        self.fd_hi = fd_hi
        self.hd = hd
