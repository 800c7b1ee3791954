"""Exception hierarchy for the retrofit engine.

Every domain failure raised by this package derives from RetrofitError so
callers (CLI, HTTP service) can map errors to exit codes / status codes
exhaustively.
"""


class RetrofitError(Exception):
    """Base class for all errors raised by the retrofit engine."""


# --- energy conversions ---------------------------------------------------

class NegativeNetBill(RetrofitError):
    """Bill amount minus deductions is negative; inputs are inconsistent."""


class ZeroDenominator(RetrofitError):
    """Effective per-kWh price is zero; the bill cannot be converted."""


class UnknownFuelUnit(RetrofitError):
    """No conversion factor configured for this (fuel kind, unit) pair."""


class NonPositiveArea(RetrofitError):
    """Floor area must be strictly positive to form an intensity."""


# --- benchmarking ----------------------------------------------------------

class EmptyGroup(RetrofitError):
    """No sufficiently large reference group exists, even after widening."""


class UnknownYear(RetrofitError):
    """Requested year lies outside the configured energy-target table."""


# --- surrogate models ------------------------------------------------------

class Underdetermined(RetrofitError):
    """Fewer samples than regression coefficients."""


class RankDeficient(RetrofitError):
    """Design matrix has collinear columns."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class DimensionMismatch(RetrofitError):
    """Input point dimension does not match the model."""


class NoSupport(RetrofitError):
    """Too few support points in range, even after radius expansion."""


class ConstantResponse(RetrofitError):
    """Response has zero variance; goodness-of-fit is undefined."""


# --- sensitivity analysis --------------------------------------------------

class DimensionUnsupported(RetrofitError):
    """Requested dimension exceeds the embedded direction-number table."""


class ZeroVariance(RetrofitError):
    """Model output variance is (numerically) zero; indices are undefined."""


# --- data store ------------------------------------------------------------

class SchemaMismatch(RetrofitError):
    """CSV header does not match the documented record schema."""


class EmptyFile(RetrofitError):
    """Input contains no data rows."""


class IoFailure(RetrofitError):
    """Underlying file operation failed."""


class CorruptStore(RetrofitError):
    """Stored dataset fails its integrity check."""
