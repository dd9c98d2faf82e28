"""Exception hierarchy shared by every module.

The CLI maps these onto its exit codes: ``DomainError`` -> 3,
``ConvergenceError`` -> 4.
"""


class QconfError(Exception):
    """Base class for all library errors."""


class DomainError(QconfError, ValueError):
    """The inputs fall outside the domain where a quantity is defined."""


class ConvergenceError(QconfError):
    """A numeric limit could not be certified along the supplied t-grid."""


class FieldMismatch(QconfError, TypeError):
    pass


class MissingVariable(DomainError):
    pass


class NearZeroDenominator(DomainError):
    pass


class ZeroBase(DomainError):
    pass


class QEqualsOne(DomainError):
    pass


class NonUnitLeadingCoefficient(DomainError):
    pass


class UnknownCoefficient(DomainError):
    """Requested a coefficient beyond the truncation order."""


class LogDegreeExceeded(DomainError):
    pass


class ModulusQNotLessThanOne(DomainError):
    pass


class WindowTooSmall(DomainError):
    pass


class NearThetaZero(DomainError):
    pass


class SpiralCut(DomainError):
    pass


class CoincidingEquivariantParameters(DomainError):
    pass


class DegenerateBasis(DomainError):
    pass


class ResonantParameters(DomainError):
    pass


class TruncationTooShort(DomainError):
    pass


class LeadingCoefficientVanishes(DomainError):
    pass


class SingularGauge(DomainError):
    pass


class ZeroScale(DomainError):
    pass


class PolesOnCommonSpiral(DomainError):
    pass


class JordanCaseUnsupported(DomainError):
    pass


class DivergentCoefficient(ConvergenceError):
    pass


class NoConvergence(ConvergenceError):
    pass
