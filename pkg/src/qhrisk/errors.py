"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class IntegrabilityError(ArithmeticError):
    """An improper integral did not settle under doubling truncation."""


class NumericError(ArithmeticError):
    """A root-finder or quadrature routine failed to reach its tolerance.

    ``estimate`` and ``bound`` carry the last achieved value and its error
    estimate (or residual) when available.
    """

    def __init__(self, message, estimate=None, bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.bound = bound


class PreconditionError(RuntimeError):
    """A diagnostic required by an experiment failed and was not overridden."""


class SpecError(ValueError):
    """A textual risk/distribution/weight spec could not be parsed."""


class ReportSchemaError(ValueError):
    """A persisted report has an unsupported schema version or layout."""
