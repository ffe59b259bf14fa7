"""Exception types shared across the package.

Each error marks a violated contract; callers that can recover catch the
specific class, the CLI maps them to exit codes.
"""


class DipoleSumError(Exception):
    """Base class for all package errors."""


class RateMismatch(DipoleSumError):
    """Sum of two exponential-polynomial functions with different decay rates."""


class DivergentAtOrigin(DipoleSumError):
    """An integral whose integrand carries a non-integrable power at rho=0."""


class ResonanceUnprojected(DipoleSumError):
    """Inhomogeneous solve with a right-hand side not orthogonal to the
    normalizable homogeneous solution."""


class NoPolynomialSolution(DipoleSumError):
    """The polynomial ansatz closes on an inconsistent linear system."""


class NonPolynomialPotential(DipoleSumError):
    """Operation requires a potential that maps polynomials to polynomials."""


class ExponentFloorExceeded(DipoleSumError):
    """A constructed function is more singular than rho**-4 at the origin."""


class InvalidQuantumNumbers(DipoleSumError):
    """Quantum numbers outside 1 <= n, 0 <= l <= n-1, or a forbidden channel."""


class NonPositiveQ(DipoleSumError):
    """Continuum wavenumber must be positive."""


class GridTooShort(DipoleSumError):
    """Grid does not reach far enough into the asymptotic region."""


class ChannelMismatch(DipoleSumError):
    """Continuum wave angular momentum is not a dipole partner of the state."""


class QuadratureNotConverged(DipoleSumError):
    """Iterated quadrature failed to reach the requested tolerance."""


class NoBoundState(DipoleSumError):
    """The potential has no bound state with the requested node count."""


class NotConverged(DipoleSumError):
    """Eigenvalue iteration exhausted without meeting tolerance."""


class SingularDerivative(DipoleSumError):
    """Grid ladder would require derivatives of a singular potential at rho=0."""


class InvalidOrder(DipoleSumError):
    """Sum-rule order outside the range where the requested form exists."""


class OutOfValidityRange(DipoleSumError):
    """Recurrence evaluated outside its validity range."""


class DivergentExpectation(DipoleSumError):
    """Expectation value does not exist for this state."""


class NonPositiveScale(DipoleSumError):
    """Physical scale inputs must be positive."""


class DivergentSumRule(DipoleSumError):
    """The continuum part of the requested sum rule diverges."""
