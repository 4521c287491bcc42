"""Exception types shared across the library."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """An iterative evaluation failed to converge within its budget."""


class ValidationError(ValueError):
    """A distribution or matrix failed one or more invariants."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnsupportedError(ValueError):
    """Requested operation is not defined for the given inputs."""


class DegenerateTensorError(ValueError):
    """All eigenvalues vanish, so anisotropy indices are undefined."""


class UnboundedRatioError(ValueError):
    """Eigenvalue ratio undefined because the smallest eigenvalue is <= 0."""
