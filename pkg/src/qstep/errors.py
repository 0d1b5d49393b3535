"""Exception types shared across the package.

Everything derives from QstepError so callers can catch the package's own
failures without swallowing programming errors.
"""


class QstepError(Exception):
    pass


class NonHermitianInput(QstepError):
    """Operator fails the Hermiticity tolerance."""


class DimensionMismatch(QstepError):
    pass


class OrthogonalStates(QstepError):
    """phase_align got states with overlap below threshold (level crossing)."""


class StencilFailure(QstepError):
    """A finite-difference stencil evaluation raised."""


class NegativeProbability(QstepError):
    """A probability below -1e-12 appeared where a distribution was expected."""


class UnnormalizedProbs(QstepError):
    pass


class SingularQfim(QstepError):
    """QFIM determinant below tolerance; carries det and condition number."""

    def __init__(self, det, cond):
        super().__init__(f"singular QFIM: det={det:g}, cond={cond:g}")
        self.det = det
        self.cond = cond


class GammaOutOfRange(QstepError):
    pass


class DegenerateDiagonal(QstepError):
    """A QFIM diagonal entry is nonpositive where a ratio needs it."""


class DeltaTooLarge(QstepError):
    """|delta| exceeds the Cauchy-Schwarz bound sqrt(Q11*Q22)."""


class DimensionBudget(QstepError):
    """Requested Hilbert-space dimension exceeds the dense-solver budget."""


class ZeroLikelihood(QstepError):
    """Every grid cell has likelihood below the underflow floor."""
