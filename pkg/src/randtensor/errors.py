"""Exception types shared by the engines and mapped to CLI exit codes."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceGuardError(RuntimeError):
    """A request exceeds a configured size guard (enumeration cap, matrix size, ...)."""


class NumericError(ArithmeticError):
    """A numerical routine failed to converge or violated its residual check."""
