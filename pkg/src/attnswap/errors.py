"""Exception hierarchy.

Every error the library raises on bad input derives from :class:`AttnError`;
the CLI maps these to exit code 1 and anything else to exit code 2.
"""


class AttnError(Exception):
    """Base class for user-facing errors."""


class MissingFile(AttnError, FileNotFoundError):
    pass


class SchemaViolation(AttnError, ValueError):
    pass


class DanglingReference(AttnError, ValueError):
    pass


class UnsortedInput(AttnError, ValueError):
    pass


class UnparsableAttribute(AttnError, ValueError):
    pass


class EmptyInput(AttnError, ValueError):
    pass


class EmptyDataset(EmptyInput):
    pass


class EmptyIndex(EmptyInput):
    pass


class TooFewRows(AttnError, ValueError):
    pass


class RowCountMismatch(AttnError, ValueError):
    pass


class LengthMismatch(AttnError, ValueError):
    pass


class SingularCovariance(AttnError, ArithmeticError):
    pass


class DimensionTooLarge(AttnError, ValueError):
    pass


class ZeroTextCost(AttnError, ZeroDivisionError):
    pass


class ZeroBandwidth(AttnError, ZeroDivisionError):
    pass


class UnreadableRaster(AttnError, OSError):
    pass


class InvalidSpec(AttnError, ValueError):
    pass


class FormatError(AttnError, ValueError):
    """A binary artifact has the wrong magic, version or size."""


class InvalidArgument(AttnError, ValueError):
    """A parameter value outside its allowed range or set."""
