"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage and support problems exit 1,
model format and unitarity failures exit 2, numerical-budget failures
(cutoff headroom, truncation leakage, dense dimension) exit 3.
"""


class BogofisherError(Exception):
    """Base class for package errors."""


class UsageError(BogofisherError):
    """Malformed command-line invocation."""


class ModelFormatError(BogofisherError):
    """Model, state, or support document violates the expected schema."""


class UnitarityError(BogofisherError):
    """First-order coefficient data fails the unitarity constraints."""


class SupportError(BogofisherError):
    """State support incompatible with the requested operation."""


class BudgetError(BogofisherError):
    """Numerical budget exceeded: cutoff headroom, leakage, or dense dimension."""
