"""Exception types shared across the toolkit."""


class NotCoprimeError(ValueError):
    """Raised when an operation needs gcd(a, q) = 1 and the caller passed otherwise."""


class CapacityError(MemoryError):
    """Requested table size exceeds the configured memory budget."""


class ToleranceError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""


class ContourError(ValueError):
    """Contour abscissa lies outside the strip where the integrand is analytic."""


class UnsupportedKernelError(RuntimeError):
    """Maass-form Bessel kernels requested while the capability is disabled."""


class EmptyModuliError(ValueError):
    """No admissible moduli in the requested range."""


class CacheChecksumError(IOError):
    """Cache file is truncated or corrupted."""


class CacheVersionError(IOError):
    """Cache file has the wrong magic bytes or an unknown format version."""


class RangeNotCoveredError(ValueError):
    """A coefficient table is too short for the requested sum."""


class BudgetError(RuntimeError):
    """Direct evaluation would exceed the configured operation budget."""
