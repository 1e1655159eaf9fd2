"""Exception hierarchy shared across the package.

``ValidationError`` covers bad user input (CLI exit code 1); everything else
derived from ``PairscaleError`` is a runtime failure (CLI exit code 2).
"""


class PairscaleError(Exception):
    """Base class for all package errors."""


class ValidationError(PairscaleError):
    """Invalid input: bad flags, malformed files, contract violations."""


class ParseError(ValidationError):
    """A data file could not be parsed; message names the offending row."""


class MatrixError(ValidationError):
    """A preference or count matrix violates its structural invariants."""


class ComparatorError(PairscaleError):
    """Base class for comparator backend failures."""


class UnresolvableReferenceError(ComparatorError):
    """An image reference could not be resolved by the backend."""


class CacheMissError(ComparatorError):
    """The logits cache holds no entry for the requested ordered pair."""


class TransportError(ComparatorError):
    """The remote backend could not be reached (after bounded retries)."""


class ProtocolError(ComparatorError):
    """The remote backend answered, but not with a valid response."""


class SolverError(PairscaleError):
    """The MAP solver failed."""


class NonConvergenceError(SolverError):
    """Solver hit the iteration cap; carries the final gradient norm."""

    def __init__(self, grad_norm: float, iterations: int):
        self.grad_norm = grad_norm
        self.iterations = iterations
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(gradient norm {grad_norm:.3e})"
        )


class MetricError(PairscaleError):
    """A correlation metric is undefined for the given inputs."""


class ExperimentError(PairscaleError):
    """A multi-split experiment aborted; message identifies the split."""
