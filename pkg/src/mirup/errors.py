"""Exception types shared across the workbench.

The CLI maps these onto exit codes: configuration problems exit 2, domain
(physics/precondition) problems exit 3, I/O problems exit 4.
"""


class MirupError(Exception):
    """Base class for all workbench errors."""


class DomainError(MirupError, ValueError):
    """A physical quantity or argument violates its stated constraints."""


class ConfigError(MirupError, ValueError):
    """A scenario file, CLI option or data file is malformed or inconsistent."""


class InconsistentBudgetError(DomainError):
    """An efficiency budget implies a probability outside [0, 1]."""


class NoInteriorOptimumError(DomainError):
    """The requested 1-D optimum does not exist inside the search interval."""
