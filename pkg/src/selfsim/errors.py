"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1,
ConvergenceError -> 2, ResourceCapError -> 3.
"""


class SelfsimError(Exception):
    """Base class for package errors."""


class ConfigError(SelfsimError):
    """Invalid configuration, argument, or system description."""


class ConvergenceError(SelfsimError):
    """An iterative solver exhausted its iteration budget before meeting tol.

    Carries the last observed step size in ``last_delta`` so callers can
    report how far from converged the run was.
    """

    def __init__(self, message: str, last_delta: float | None = None):
        super().__init__(message)
        self.last_delta = last_delta


class ResourceCapError(SelfsimError):
    """A computation would exceed a configured size cap (enumeration, atoms, ...)."""


class CompatibilityError(ConfigError):
    """A component system's substitution matrix has no admissible mass vector."""
