"""Exception types shared across the package."""


class PlankitError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PlankitError, ValueError):
    """Invalid construction parameters (bounds, radii, names, keys)."""


class ContractError(PlankitError, ValueError):
    """An operation was called with arguments violating its preconditions."""


class TimeMonotonicityError(ContractError):
    """Time-augmented interpolation asked to go backwards in time."""


class EmptyStructureError(PlankitError, LookupError):
    """Query on an empty container."""


class PreconditionError(ContractError):
    """A planning problem does not satisfy a planner's entry conditions."""
