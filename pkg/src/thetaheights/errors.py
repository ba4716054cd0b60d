"""Exception taxonomy shared by all modules.

The CLI maps these onto exit codes: parse errors -> 2, DomainError -> 3,
NumericError / ResourceError -> 4.
"""


class ThetaHeightsError(Exception):
    """Base class for all library errors."""


class DomainError(ThetaHeightsError, ValueError):
    """Input violates a mathematical precondition (e.g. Im tau not positive definite)."""


class SingularModelError(DomainError):
    """Weierstrass equation has vanishing discriminant."""


class MalformedChangeError(DomainError):
    """Model change produces an equation outside the Weierstrass shape."""


class OrbitCollisionError(DomainError):
    """Duplication orbit of a point hits the divisor (even-order torsion)."""


class PreconditionError(DomainError):
    """Caller-supplied data fails a stated precondition (e.g. unreduced tau)."""


class NumericError(ThetaHeightsError, ArithmeticError):
    """A numerical procedure failed to converge or verify (AGM, j-roundtrip)."""


class ResourceError(ThetaHeightsError, RuntimeError):
    """Required work exceeds the configured budget (truncation radius, digits)."""
