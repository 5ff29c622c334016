"""Exception hierarchy shared by all hypdecay modules."""


class HypdecayError(Exception):
    """Base class for all errors raised by this package."""


class NonSquare(HypdecayError):
    """A matrix operation received a non-square matrix."""


class NumericalFailure(HypdecayError):
    """An underlying iterative routine did not converge."""


class ZeroDenominator(HypdecayError):
    """A trace denominator vanished; the stated multiplicity is likely
    wrong or the target eigenvalue is not semi-simple."""


class PostconditionFailure(HypdecayError):
    """A computed object violates its defining algebraic identity."""


class ClusterAmbiguous(HypdecayError):
    """Eigenvalue clustering could not be separated from the rest of the
    spectrum at the requested tolerance."""


class ConditionViolation(HypdecayError):
    """A structural condition required by an operation does not hold."""

    def __init__(self, condition: str, message: str = ""):
        self.condition = condition
        super().__init__(f"condition {condition} violated" + (f": {message}" if message else ""))


class ReductionMissing(HypdecayError):
    """An operation needs reduction data that is unavailable or could not
    be computed."""


class BranchExtractionFailure(HypdecayError):
    """A restricted-subspace eigenproblem was numerically defective beyond
    nilpotent-part extraction."""


class MissingPj1(HypdecayError):
    """Refined profile requested but a diffusion branch carries no
    first-order projection coefficient (reduced speeds not all simple)."""


class DomainTooSmall(HypdecayError):
    """The periodic domain cannot contain the solution support at the
    requested time without wrap-around."""


class DegenerateFit(HypdecayError):
    """Decay-fit input is at the floating-point noise floor."""


class FitFailure(HypdecayError):
    """A slope fit could not be carried out meaningfully."""


class ParseError(HypdecayError):
    """A system-definition file is malformed."""


class ShapeError(HypdecayError):
    """A system-definition file carries matrices of inconsistent shape."""
