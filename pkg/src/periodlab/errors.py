"""Exception hierarchy shared by all periodlab modules."""


class PeriodLabError(Exception):
    """Base class; the CLI maps any subclass to exit status 2."""

    stage = "periodlab"


class ParseError(PeriodLabError):
    stage = "parse"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedOrderError(PeriodLabError):
    stage = "parse"


class NotMUMError(PeriodLabError):
    stage = "frobenius"


class OutOfDiscError(PeriodLabError):
    stage = "series"


class PrecisionError(PeriodLabError):
    stage = "series"

    def __init__(self, message, required=None, achieved=None):
        self.required = required
        self.achieved = achieved
        super().__init__(message)


class ClearanceError(PeriodLabError):
    stage = "path"


class StepSizeError(PeriodLabError):
    stage = "continuation"


class SingularStepError(PeriodLabError):
    stage = "continuation"


class InconsistencyError(PeriodLabError):
    """F_infinity failed to be an involution: usually a wrong branch or path."""

    stage = "deligne"


class NonInvolutionError(PeriodLabError):
    stage = "deligne"


class InsufficientDataError(PeriodLabError):
    stage = "hodge"


class CoefficientGapError(PeriodLabError):
    stage = "lfunc"

    def __init__(self, message, missing=()):
        self.missing = tuple(missing)
        super().__init__(message)


class SignError(PeriodLabError):
    stage = "lfunc"


class ConvergenceError(PeriodLabError):
    stage = "lfunc"


class CrossCheckError(PeriodLabError):
    stage = "lfunc"


class OfflineError(PeriodLabError):
    stage = "lmfdb"


class RejectedPayloadError(PeriodLabError):
    stage = "lmfdb"


class NotFoundError(PeriodLabError):
    stage = "lmfdb"
