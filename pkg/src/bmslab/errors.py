"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes: configuration problems exit 2,
numeric/degeneracy problems exit 3, and internal consistency failures
(raw vs augmented trajectory mismatch) exit 4.
"""


class BmsError(Exception):
    """Base class for all bmslab errors."""


class ConfigurationError(BmsError):
    """Invalid rule, portfolio, config document, or CLI argument."""


class NumericError(BmsError):
    """A numeric computation produced non-finite or unusable values."""


class DegeneracyError(NumericError):
    """The stationary solve is singular or failed its residual checks."""


class AccuracyError(NumericError):
    """A quadrature grid cannot meet its moment tolerances."""


class ConsistencyError(BmsError):
    """Two implementations that must agree (raw vs augmented rule) diverged."""
