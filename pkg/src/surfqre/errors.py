"""Exception types shared by all modules; the CLI maps them to exit codes."""


class SurfqreError(Exception):
    exit_code = 5


class ValidationError(SurfqreError, ValueError):
    """Invalid input data or parameters."""

    exit_code = 3


class InfeasibleError(SurfqreError):
    """A requested design has no solution under the given constraints."""

    exit_code = 4


class DecompositionError(SurfqreError):
    """A fault could not be reduced to graph-like edges."""

    exit_code = 5
