"""Exception hierarchy shared across the package."""

from __future__ import annotations


class UrnwalkError(Exception):
    """Base class for all library errors."""


class ConfigError(UrnwalkError):
    """A run configuration is malformed or inconsistent."""


class DimensionMismatchError(UrnwalkError):
    """An input vector does not match the expected dimension."""


class EvaluationError(UrnwalkError):
    """A law or environment could not be evaluated (underflow, bad value)."""


class TableDomainError(EvaluationError):
    """A tabulated law was queried outside its box and has no fallback."""


class NotAdmissibleError(UrnwalkError):
    """Path independence failed: the law cannot come from an environment."""


class MomentOrderError(UrnwalkError):
    """A difference or mass was requested beyond the table's order."""


class EnumerationGuardError(UrnwalkError):
    """Exact path enumeration would exceed the configured path budget."""
