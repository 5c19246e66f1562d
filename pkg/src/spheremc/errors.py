"""Exception types shared across the package."""


class SphereMCError(Exception):
    """Base class for all package errors."""


class RejectionLimitError(SphereMCError):
    """A rejection loop exceeded its iteration cap.

    Carries the number of rejections seen so the caller can distinguish a
    pathological target from a too-small cap.
    """

    def __init__(self, message, rejections):
        super().__init__(f"{message} (rejections={rejections})")
        self.rejections = rejections


class DegenerateTangentError(SphereMCError):
    """Repeated tangent draws collapsed to (numerically) zero vectors."""


class GradientError(SphereMCError):
    """A log-density gradient evaluated to a non-finite value."""


class ConfigError(SphereMCError):
    """An experiment configuration failed validation.

    ``field`` names the offending entry using dotted-path notation.
    """

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
