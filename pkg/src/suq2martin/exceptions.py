"""Exception hierarchy shared by all modules."""


class Suq2Error(Exception):
    """Base class for errors raised by suq2martin."""


class InputError(Suq2Error, ValueError):
    """An argument violates an operation's precondition."""


class NumericalError(Suq2Error, ArithmeticError):
    """A numerical procedure failed to reach its certified target."""


class TransienceError(NumericalError):
    """The geometric decay bound does not certify transience (decay rate >= 1)."""


class UndercertifiedError(NumericalError):
    """A certified lower bound is too weak to divide by."""


class ResourceError(Suq2Error, MemoryError):
    """A request would exceed the configured memory budget."""
