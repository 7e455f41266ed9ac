"""Exception hierarchy for hardy-refine.

Every failure a verification can hit derives from RefineError so the CLI can
map it to exit status 1 in one place. Quadrature budget exhaustion is not an
error: it is reported through ``QuadResult.converged``.
"""

from typing import Any


class RefineError(Exception):
    """Base class for all hardy-refine errors."""


class ConfigError(RefineError):
    """Invalid configuration value or command-line usage."""


class PreconditionError(RefineError, ValueError):
    """An operation was called outside its documented domain (e.g. p <= 1)."""


class NonFiniteSampleError(RefineError):
    """An integrand returned NaN or infinity at a quadrature node."""

    def __init__(self, t: float, value: float, where: str = "integrand"):
        self.t = t
        self.value = value
        self.where = where
        super().__init__(f"{where} is not finite at t={t!r} (got {value!r})")


class KinkNotBracketedError(RefineError):
    """Bisection could not isolate a sign change within resolution."""

    def __init__(self, lo: float, hi: float, reason: str):
        self.lo = lo
        self.hi = hi
        super().__init__(f"cannot bracket kink in [{lo!r}, {hi!r}]: {reason}")


class ExpressionSyntaxError(RefineError):
    """The expression text does not follow the grammar."""

    def __init__(self, message: str, offset: int, expected: frozenset[str]):
        self.offset = offset
        self.expected = expected
        wanted = ", ".join(sorted(expected)) if expected else "end of input"
        super().__init__(f"{message} at offset {offset} (expected one of: {wanted})")


class UnknownIdentifierError(RefineError):
    """The expression names a function or variable the language does not define."""

    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class DomainError(RefineError):
    """An expression node was evaluated outside its real domain."""

    def __init__(self, node: Any, t: float, reason: str):
        self.node = node
        self.t = t
        self.reason = reason
        super().__init__(f"{reason} in '{node}' at t={t!r}")


class DegenerateGridError(RefineError):
    """A superquadratic grid has fewer than three distinct points."""


class EigenFailureError(RefineError):
    """Hermitian eigendecomposition did not converge."""


class PSDViolationError(RefineError):
    """A matrix required to be positive semidefinite is not, beyond tolerance."""

    def __init__(self, eigmin: float, bound: float, where: str = "matrix"):
        self.eigmin = eigmin
        self.bound = bound
        super().__init__(f"{where} is not PSD: eigmin={eigmin!r} < {bound!r}")


class HypothesisViolatedError(RefineError):
    """A theorem hypothesis does not hold for the supplied instance."""

    def __init__(self, which: str, detail: str):
        self.which = which
        super().__init__(f"hypothesis '{which}' violated: {detail}")
