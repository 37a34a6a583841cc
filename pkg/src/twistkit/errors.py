"""Exception hierarchy shared by all twistkit modules."""

from __future__ import annotations


class TwistkitError(Exception):
    """Base class for every error raised by twistkit."""


class DivisionByZero(TwistkitError):
    """Division by an identically-zero expression."""

    def __init__(self, message="division by zero expression", atom=None):
        super().__init__(message)
        self.atom = atom


class PoleAtAllSamples(TwistkitError):
    """Every sampled evaluation point hit a vanishing denominator."""


class TruncationExceeded(TwistkitError):
    """An operation required a jet atom beyond the allowed order."""


class NotScalarBase(TwistkitError):
    """Operation requires a single independent variable."""


class DimensionMismatch(TwistkitError):
    pass


class MCHViolated(TwistkitError):
    """Matrix one-form fails the horizontal Maurer-Cartan equation."""


class NoSolvedRule(TwistkitError):
    """A leading jet cannot be eliminated by the available solved rules."""

    def __init__(self, atom):
        super().__init__(f"no solved rule eliminates {atom!r}")
        self.atom = atom


class NotInvariant(TwistkitError):
    """A claimed differential invariant is not annihilated by the field."""

    def __init__(self, which):
        super().__init__(f"{which} is not an invariant of the prolonged field")
        self.which = which


class OrderTooHigh(TwistkitError):
    pass


class UnsupportedDegree(TwistkitError):
    pass


class SingularMatrix(TwistkitError):
    pass


class NotVertical(TwistkitError):
    """Gauge actions and vertical pipelines reject fields with xi != 0."""


class NoDecomposition(TwistkitError):
    """A compatibility residual does not reduce modulo the base system."""

    def __init__(self, residual_index, message="residual does not decompose over the base residuals"):
        super().__init__(message)
        self.residual_index = residual_index


class NotExponentialForm(TwistkitError):
    """Field does not satisfy the bracket condition for exponential w-dependence."""


class ParseError(TwistkitError):
    """Syntax error in an expression or problem file, with position info."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" at line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(message + loc)
        self.line = line
        self.column = column


class UnknownSymbol(ParseError):
    def __init__(self, name, line=None, column=None):
        super().__init__(f"unknown symbol {name!r}", line, column)
        self.name = name


class ArityError(ParseError):
    pass


class UndeclaredReference(TwistkitError):
    pass


class DuplicateDeclaration(TwistkitError):
    pass
