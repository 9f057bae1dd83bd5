"""Exception types shared across the toolkit."""


class WildsieveError(Exception):
    """Base class for all toolkit errors."""


class InvalidDimensionError(WildsieveError, ValueError):
    """A grid or image has an unusable shape for the requested operation."""


class InvalidArgumentError(WildsieveError, ValueError):
    """An argument violates an operation precondition."""


class EmptyMaskError(WildsieveError, ValueError):
    """A masked reduction was requested over a mask with zero total weight."""


class DegenerateRotationError(WildsieveError, ValueError):
    """6D rotation seeds are parallel or too short to orthonormalize."""


class FileFormatError(WildsieveError):
    """A binary grid file is truncated or carries a wrong magic/version."""
