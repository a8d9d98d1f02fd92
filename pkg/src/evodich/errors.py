"""Exception hierarchy.

Every failure raised by the library derives from :class:`EvodichError`, so
callers (and the command-line front end) can separate analysis refusals from
programming errors.
"""


class EvodichError(Exception):
    """Base class for all library errors."""


class DimensionError(EvodichError, ValueError):
    """Raised when an array has the wrong shape (e.g. a non-square matrix)."""


class DomainError(EvodichError, ValueError):
    """Raised when an argument lies outside the admissible domain."""


class OrderingError(EvodichError, ValueError):
    """Raised when propagator times are not ordered ``x >= r >= s``."""


class PreconditionError(EvodichError):
    """Raised when a caller-certified hypothesis does not hold.

    ``value`` carries the measured quantity that violated it.
    """

    def __init__(self, msg, value=None):
        super().__init__(msg)
        self.value = value


class SingularResolventError(EvodichError):
    """Raised when a resolvent is requested at (or near) an eigenvalue."""

    def __init__(self, msg, eigenvalue=None):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


class SingularPointError(SingularResolventError):
    """Raised by imaginary-axis scans when ``i*k`` is an eigenvalue."""

    def __init__(self, msg, k, eigenvalue=None):
        super().__init__(msg, eigenvalue)
        self.k = k


class SingularMonodromyError(EvodichError):
    """Raised when ``exp(2*pi*A) - I`` is singular."""

    def __init__(self, msg, eigenvalue=None):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


class UnsupportedPolicyError(EvodichError):
    """Raised when an operation needs a boundary policy the operator lacks."""


class NotHyperbolicError(EvodichError):
    """Raised when the circle margin does not certify hyperbolicity.

    ``margin`` and ``argmin`` record where the scan came closest to
    singularity.
    """

    def __init__(self, msg, margin=None, argmin=None):
        super().__init__(msg)
        self.margin = margin
        self.argmin = argmin


class NonMultiplicativeProjectionError(EvodichError):
    """Raised when a projection is not block diagonal within tolerance."""

    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class CertificateRefusedError(EvodichError):
    """Raised when the decay fit does not exhibit a positive rate."""

    def __init__(self, msg, rate=None):
        super().__init__(msg)
        self.rate = rate


class DivergenceError(EvodichError):
    """Raised when a Neumann series fails to contract."""


class ConfigError(EvodichError):
    """Raised for invalid scenario configurations.

    ``key`` is the dotted path of the offending entry, e.g. ``numeric.window``.
    """

    def __init__(self, msg, key=None):
        super().__init__(f"{key}: {msg}" if key else msg)
        self.key = key
