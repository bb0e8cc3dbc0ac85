"""Exception hierarchy.

Every error carries a ``kind`` used by the CLI to pick an exit code:
``"precondition"`` maps to exit status 2 and ``"numerical"`` to 3.
"""


class PFError(Exception):
    """Base class for all package errors."""

    kind = "precondition"


class InvalidInput(PFError):
    pass


class DimensionMismatch(PFError):
    pass


class NotSelfAdjoint(PFError):
    pass


class UnsupportedOrder(PFError):
    pass


class SingularityAtEndpoint(PFError):
    pass


class NegativeEigenvalue(PFError):
    pass


class DivergentIntegral(PFError):
    pass


class OnBranchCut(PFError):
    pass


class NoRoot(PFError):
    pass


class SingularS(PFError):
    pass


class NormKOneExceedsOne(PFError):
    kind = "numerical"


class GeneratorNotInSp2(PFError):
    pass


class VacuumOverlapZero(PFError):
    kind = "numerical"


class DenominatorVanishes(PFError):
    pass


class MassTooSmall(PFError):
    pass


class OverlappingSupports(PFError):
    pass


class DispersionVanishesOnSupport(PFError):
    pass


class LatticeTooLarge(PFError):
    pass


class OriginInSupport(PFError):
    pass


class MassAboveCritical(PFError):
    pass


class UnsupportedN(PFError):
    pass


class NonConvergence(PFError):
    kind = "numerical"


class SeriesNonConvergent(PFError):
    kind = "numerical"


class GridTooCoarse(PFError):
    kind = "numerical"
