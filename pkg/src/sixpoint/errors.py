"""Exception types raised across the package."""


class SixPointError(Exception):
    """Base class for all errors raised by this package."""


class NotNormalized(SixPointError, ValueError):
    pass


class DegenerateRotation(SixPointError, ValueError):
    pass


class ZeroVector(SixPointError, ValueError):
    pass


class NotSquare(SixPointError, ValueError):
    pass


class NotDivisible(SixPointError, ArithmeticError):
    pass


class InvalidProblem(SixPointError, ValueError):
    pass


class SolveFailure(SixPointError, RuntimeError):
    pass


class NoRealRoots(SixPointError):
    pass


class TranslationAtInfinity(SixPointError, ArithmeticError):
    pass


class ConfigurationMismatch(SixPointError, ValueError):
    pass


class DegenerateTriangulation(SixPointError, ArithmeticError):
    pass


class NoModelFound(SixPointError, RuntimeError):
    pass
