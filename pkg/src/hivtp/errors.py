"""Error taxonomy shared by the whole engine.

Two broad families matter to callers: ``ValidationError`` (the input or
configuration is wrong; CLI exit code 2) and ``IoFailure`` (the operating
system failed us; CLI exit code 1).
"""


class HivtpError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(HivtpError):
    """Input data, file content, or configuration violates a contract."""


class IoFailure(HivtpError):
    """An underlying OS-level read or write failed."""


# tensor file format
class BadMagic(ValidationError):
    pass


class UnsupportedVersion(ValidationError):
    pass


class UnsupportedDtype(ValidationError):
    pass


class TruncatedPayload(ValidationError):
    pass


class NaNPayload(ValidationError):
    pass


class InvalidShape(ValidationError):
    pass


# importance scoring
class LayerOutOfRange(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class NotPerfectSquare(ValidationError):
    pass


# pruning
class NotDivisible(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class QuotaExceedsRegion(ValidationError):
    pass


class OverlapDetected(ValidationError):
    pass


# synthetic data
class InvalidSpec(ValidationError):
    pass


# cost model
class InsufficientData(ValidationError):
    pass


class DegenerateDesign(ValidationError):
    pass
