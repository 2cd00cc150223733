"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An operation was called outside its stated preconditions."""


class DomainError(ContractViolation):
    """Unstable topology or an argument outside the mathematical domain."""


class BudgetExceeded(RuntimeError):
    """The requested computation exceeds the configured budget."""


class MissingVolume(LookupError):
    """A volume polynomial needed in exact mode is not available."""


class ConventionMismatch(ValueError):
    """A stored table was written under a different V_{1,1} convention."""


class QuadratureError(RuntimeError):
    """Quadrature failed to converge; carries the last estimate."""

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate
