"""Exception hierarchy shared by every module."""


class SlpinnError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SlpinnError, ValueError):
    """Invalid or missing configuration (bad kind, kappa, counts, config keys)."""


class ContractViolation(SlpinnError, ValueError):
    """A caller broke a documented precondition (e.g. asked for u_t in 1-D)."""


class NumericOverflowError(SlpinnError, FloatingPointError):
    """A loss term or gradient became non-finite."""

    def __init__(self, term, message=None):
        self.term = term
        super().__init__(message or f"non-finite value in loss term {term!r}")


class AccuracyError(SlpinnError):
    """A reference solver failed its self-convergence requirement."""


class SolverBlowupError(SlpinnError, FloatingPointError):
    """A reference solver produced a non-finite field."""


class SingularDesignError(SlpinnError, ValueError):
    """Regression design matrix is rank deficient."""


class InsufficientDataError(SlpinnError, ValueError):
    """Not enough observations / cells for the requested fit."""

    def __init__(self, message, missing=()):
        self.missing = list(missing)
        super().__init__(message)


class DegenerateReferenceError(SlpinnError, ValueError):
    """Reference field has zero norm, relative error undefined."""
