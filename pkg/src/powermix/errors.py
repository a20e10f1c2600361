"""Exception types raised across the package."""


class PowermixError(Exception):
    """Base class for all package errors."""


class DomainError(PowermixError, ValueError):
    """A parameter lies outside the admissible domain."""


class GridRangeError(PowermixError, ValueError):
    """A grid-backed transform was queried outside its covered interval."""

    def __init__(self, value, lo, hi):
        self.value, self.lo, self.hi = value, lo, hi
        super().__init__(
            f"argument {value!r} outside covered interval [{lo!r}, {hi!r}]")


class ConditionError(PowermixError, ValueError):
    """A moment condition of an equation family is violated."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class ExtractionError(PowermixError, ArithmeticError):
    """Moment extraction from a transform failed."""


class CapabilityError(PowermixError, TypeError):
    """An object lacks a capability (sampler, mean, closed form) that was requested."""


class ConfigError(PowermixError, ValueError):
    """A run configuration is malformed."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
