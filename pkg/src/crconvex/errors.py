"""Exception hierarchy shared by all stages of the pipeline."""


class CRConvexError(Exception):
    """Base class; `stage` names the pipeline stage that raised."""

    stage = "internal"
    exit_code = 1


class ParseError(CRConvexError):
    stage = "parse"
    exit_code = 2

    def __init__(self, message, pos=None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class RealityError(ParseError):
    """A polynomial that should be real-valued has unpaired coefficients."""


class ModelError(CRConvexError):
    stage = "model"
    exit_code = 3


class TransformError(CRConvexError):
    stage = "transform"
    exit_code = 3


class ConvergenceError(CRConvexError):
    stage = "convexity"
    exit_code = 4


class InconsistentReport(CRConvexError):
    stage = "report"
    exit_code = 4
