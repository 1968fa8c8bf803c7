"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class SupersingletError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InvalidInputError(SupersingletError, ValueError):
    """An argument violates an operation's precondition."""

    exit_code = 1


class ResourceLimitError(SupersingletError):
    """A request would exceed a configured size cap."""

    exit_code = 2


class ConsistencyError(SupersingletError, ArithmeticError):
    """A numerical self-check failed (e.g. a non-real expectation value)."""

    exit_code = 3
