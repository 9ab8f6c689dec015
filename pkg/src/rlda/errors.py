"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An argument broke a documented precondition or type invariant."""


class RetractionError(RuntimeError):
    """Retraction hit a rank-deficient argument and cannot produce a frame."""


class SolverError(RuntimeError):
    """An optimizer encountered a non-finite cost or model value."""


class ParseError(ValueError):
    """A dataset file is malformed; the message carries the offending location."""


class ConfigError(ValueError):
    """An experiment or CLI configuration is invalid."""
