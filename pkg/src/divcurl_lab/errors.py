"""Exception types raised across the package."""


class LabError(ValueError):
    """Base class for invalid inputs to lab operations."""


class UnsupportedDimension(LabError):
    pass


class InvalidOrder(LabError):
    pass


class DomainViolation(LabError):
    pass


class EmptyGrid(LabError):
    pass


class InvalidCapRadius(LabError):
    pass


class InvalidExponent(LabError):
    pass


class InvalidDelta(LabError):
    pass


class MissingGradient(LabError):
    pass


class InconsistentGrid(LabError):
    pass


class ExponentOutOfRange(LabError):
    pass


class InvalidExponentPair(LabError):
    pass


class SupportViolation(LabError):
    pass


class InsufficientData(LabError):
    pass


class DegenerateFamily(LabError):
    pass


class NonCoercive(LabError):
    pass


class UnknownExperiment(LabError):
    pass


class InvalidConfig(LabError):
    """Raised for a bad experiment config; the message names the field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
