"""Exception types shared across the package.

Everything raised on purpose derives from TwistkitError so callers can
catch one base type.  Errors that carry a mathematical witness keep it in
a structured attribute as well as the message.
"""


class TwistkitError(Exception):
    pass


# scalars

class DivisionByZero(TwistkitError):
    pass


class ZeroDenominatorAtPoint(TwistkitError):
    """Specializing parameters made a denominator vanish."""

    def __init__(self, message, assignments=None):
        super().__init__(message)
        self.assignments = dict(assignments or {})


# free algebra

class AlphabetMismatch(TwistkitError):
    pass


class LengthMismatch(TwistkitError):
    pass


class NonLinearGenerators(TwistkitError):
    """A tensor-factor map sent a generator to something not of degree one."""
    pass


# parsing

class ParseError(TwistkitError):
    def __init__(self, message, line=None, col=None):
        loc = ""
        if line is not None:
            loc = f" at line {line}" + (f", col {col}" if col is not None else "")
        super().__init__(message + loc)
        self.line = line
        self.col = col


class InhomogeneousRelation(TwistkitError):
    pass


class UnknownCorpusEntry(TwistkitError):
    pass


# truncation

class DegreeTooLarge(TwistkitError):
    def __init__(self, requested, cap):
        super().__init__(f"truncation degree {requested} exceeds the configured cap {cap}")
        self.requested = requested
        self.cap = cap


class DegreeOutOfRange(TwistkitError):
    pass


class NotGeneratedInDegreeOne(TwistkitError):
    def __init__(self, degree, message=None):
        super().__init__(message or f"oracle dimension in degree {degree} exceeds what degree-one products span")
        self.degree = degree


# morphisms and twists

class NotAutomorphism(TwistkitError):
    pass


class NonDegreeOneGenerators(TwistkitError):
    pass


class WindowTooSmall(TwistkitError):
    pass


# twisted tensor products

class IllDefinedOverRelations(TwistkitError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotBijective(TwistkitError):
    def __init__(self, message, degree=None):
        super().__init__(message)
        self.degree = degree


class ExtensionUnderdetermined(TwistkitError):
    """The given values do not pin down a unique degreewise extension.

    Raised when the stage-by-stage linear system for the unknown blocks
    has free variables.  Supplying values on more of B (x) A (the
    first_row variant) is the way out, not picking a solution silently.
    """

    def __init__(self, message, degree=None):
        super().__init__(message)
        self.degree = degree


class UnitViolation(TwistkitError):
    pass


class DimensionMismatch(TwistkitError):
    def __init__(self, message, degree=None, expected=None, found=None):
        super().__init__(message)
        self.degree = degree
        self.expected = expected
        self.found = found


class FactorizationNotBijective(TwistkitError):
    def __init__(self, message, degree=None):
        super().__init__(message)
        self.degree = degree


class AssociativityFailure(TwistkitError):
    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


# Segre products

class NotStronglyGraded(TwistkitError):
    pass


class WindowExceedsTruncation(TwistkitError):
    pass


# quantum matrices

class UnsupportedSize(TwistkitError):
    pass


class NotWellDefined(TwistkitError):
    def __init__(self, message, condition=None, witness=None):
        super().__init__(message)
        self.condition = condition
        self.witness = witness


class ConvolutionInverseNotFound(TwistkitError):
    def __init__(self, message, degree=None):
        super().__init__(message)
        self.degree = degree
