"""Exception hierarchy shared across the package."""


class ERWSError(Exception):
    """Base class for all package errors."""


class DomainError(ERWSError, ValueError):
    """A parameter lies outside the admissible domain."""


class SumError(DomainError):
    """p + q + r does not equal one."""


class StateError(ERWSError, RuntimeError):
    """An operation was applied to a walk state that cannot accept it."""


class CapError(ERWSError, ValueError):
    """A requested size exceeds the configured computational cap."""


class DegenerateError(ERWSError, ArithmeticError):
    """A correlation is undefined because a variance vanishes."""


class IncrementError(ERWSError, ValueError):
    """A sequence jumps by more than one unit between consecutive terms."""


class RegimeError(ERWSError, ValueError):
    """The requested test does not apply to the parameters' regime."""
