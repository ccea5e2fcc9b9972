"""Exception hierarchy shared by all modules."""


class DeloneError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(DeloneError):
    """Incompatible inputs, e.g. multisets built in different scalar modes."""


class ValidationError(DeloneError):
    """An inflation system violates a structural requirement."""


class SpecError(DeloneError):
    """A system spec file could not be parsed.

    ``field`` is a dotted path to the offending entry, ``line`` the JSON line
    number when the failure is syntactic.
    """

    def __init__(self, message, field=None, line=None):
        self.message = message
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class MultiplicityOverflow(DeloneError):
    """Multiplicity blow-up: a count exceeded the configured cap."""

    def __init__(self, point, value, cap):
        self.point = point
        self.value = value
        self.cap = cap
        super().__init__(f"multiplicity blow-up at {point!r}: {value} > {cap}")


class BudgetError(DeloneError):
    """A computation would exceed its enumeration or point budget."""


class PartialEnumerationError(BudgetError):
    """Cycle enumeration stopped early; ``partial`` holds what was found."""

    def __init__(self, message, partial=()):
        self.partial = list(partial)
        super().__init__(message)


class StateError(DeloneError):
    """An operation was called before its preconditions were established."""


class InconsistencyError(DeloneError):
    """An internal cross-check failed (bad cycle, residual mass, ...)."""


class WindowTooSmall(DeloneError):
    """The region where a point set is known does not cover what was asked."""


class UnsupportedDimension(DeloneError):
    """The requested operation is only implemented for low dimensions."""
