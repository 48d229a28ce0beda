"""Exception types shared across the package."""


class InflationLabError(Exception):
    """Base class for all package-specific errors."""


class GridMismatch(InflationLabError):
    """Two fields that must share a grid do not."""


class UnresolvableScale(InflationLabError):
    """A requested length scale is too small for the grid."""


class NonConvergence(InflationLabError):
    """An iterative solve failed to reach the requested tolerance."""


class InvalidIndex(InflationLabError):
    """Concentration index outside the admissible range."""


class InvalidDeltas(InflationLabError):
    """Schedule exponents violate 0 < delta1 < delta2 < 1."""


class InvalidRegime(InflationLabError):
    """Operation requested outside the admissible (s, sigma) window."""


class BlowupDetected(InflationLabError):
    """Solution amplitude exceeded the configured guard."""


class NonFinite(InflationLabError):
    """NaN or Inf appeared in an evolving state."""


class OverlapDetected(InflationLabError):
    """Bump supports that must be disjoint (or contained) are not."""


class PreconditionViolated(InflationLabError):
    """Input data violate an experiment's stated hypothesis."""


class UnresolvedOscillation(InflationLabError):
    """Adaptive quadrature exhausted its budget before resolving an integrand."""


class ParseError(InflationLabError):
    """Config file could not be parsed; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ValidationError(InflationLabError):
    """Config parsed but violates constraints; lists every violation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            "invalid configuration:\n" + "\n".join(f"  - {v}" for v in self.violations)
        )
