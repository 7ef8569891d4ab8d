"""Exception hierarchy shared by all solver layers."""


class DeltaSatError(Exception):
    """Base class for every error raised by the package."""


class NondefinedAtPoint(DeltaSatError):
    pass


class PrecisionUnreachable(DeltaSatError):
    pass


class UnboundedVariable(DeltaSatError):
    pass


class UndefinedSubterm(DeltaSatError):
    """A term may be undefined somewhere on the closed domain (e.g. x/0)."""


class NonpositiveDelta(DeltaSatError):
    pass


class DimensionMismatch(DeltaSatError):
    pass


class EmptyInterior(DeltaSatError):
    pass


class FullLine(DeltaSatError):
    """Division by the degenerate interval [0, 0]."""


class DegenerateBisect(DeltaSatError):
    pass


class StepRejected(DeltaSatError):
    """The a-priori enclosure certificate failed for an ODE step."""


class BlowUp(DeltaSatError):
    pass


class UnboundedDerivative(DeltaSatError):
    pass


class GridTooLarge(DeltaSatError):
    pass


class ParseError(DeltaSatError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class UndeclaredVariable(ParseError):
    pass


class MissingBounds(ParseError):
    pass
