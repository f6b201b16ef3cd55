"""Exception hierarchy shared by every vidsum module."""


class VidsumError(Exception):
    """Base class for all errors raised by vidsum."""


class FormatError(VidsumError):
    """An input file could not be parsed (bad JSON, bad magic, truncation)."""


class ValidationError(VidsumError):
    """Parsed data violates a data-model invariant."""


class InfeasibleError(VidsumError):
    """A selection problem has no admissible solution."""


class CombinatorialLimitError(VidsumError):
    """An exhaustive oracle was asked to enumerate too many configurations."""
