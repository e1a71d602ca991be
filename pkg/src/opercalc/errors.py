"""Exception hierarchy shared by every opercalc module."""


class OpercalcError(Exception):
    """Base class; the CLI maps these to exit status 1."""


class DivisionByZero(OpercalcError, ZeroDivisionError):
    pass


class PoleAtBasePoint(OpercalcError):
    pass


class InsufficientOrder(OpercalcError):
    pass


class WeightMismatch(OpercalcError):
    pass


class SingularChange(OpercalcError):
    pass


class ArityMismatch(OpercalcError):
    pass


class DegenerateForm(OpercalcError):
    pass


class ParityMismatch(OpercalcError):
    pass


class TransversalityViolation(OpercalcError):
    pass


class NonInvertibleStep(OpercalcError):
    pass


class IndexOutOfRange(OpercalcError):
    pass


class UnsupportedN(OpercalcError):
    pass


class UnsupportedGenus(OpercalcError):
    pass


class JetDegenerate(OpercalcError):
    pass


class NotAnOper(OpercalcError):
    pass


class ParseError(OpercalcError):
    """Malformed scenario or expression text (CLI exit status 2)."""
