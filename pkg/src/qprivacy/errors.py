"""Exception hierarchy shared by every module."""


class QPrivacyError(Exception):
    """Base class for all errors raised by :mod:`qprivacy`."""


class InvalidMatrix(QPrivacyError, ValueError):
    pass


class InvalidInput(QPrivacyError, ValueError):
    pass


class InvalidModel(QPrivacyError, ValueError):
    pass


class SingularOutcome(QPrivacyError, ArithmeticError):
    """An outcome has vanishing probability but non-vanishing slope.

    The corresponding Fisher term diverges, so the information matrix is
    undefined at this parameter point.
    """


class RankInstability(QPrivacyError, RuntimeError):
    pass


class FitDegenerate(QPrivacyError, ValueError):
    pass


class InsufficientData(QPrivacyError, ValueError):
    pass


class FormatError(InvalidInput):
    """A file does not follow the expected JSON/CSV layout."""
