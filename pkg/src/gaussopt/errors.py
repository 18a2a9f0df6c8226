"""Exception hierarchy.

Every failure mode raised by the library is a subclass of
:class:`GaussianError`, so callers (and the CLI) can catch one type and
still report a precise name.
"""


class GaussianError(Exception):
    """Base class for all library errors."""


class ParseError(GaussianError):
    """Malformed input file or descriptor."""


class DimensionMismatch(GaussianError):
    pass


class SingularForm(GaussianError):
    """A required inverse of a bilinear form does not exist."""


class NotRestrictedComplexStructure(GaussianError):
    """Spectrum of J is not of the form ±i c with the admissible c range."""


class NotRestricted(NotRestrictedComplexStructure):
    pass


class BadBlock(GaussianError):
    pass


class DegenerateBasis(GaussianError):
    pass


class RankDeficient(GaussianError):
    pass


class NearSingular(GaussianError):
    pass


class DifferentComponent(GaussianError, UserWarning):
    """Two fermionic states lie in different components of O(2N).

    Also usable as a warning category when the condition is informative
    rather than fatal.
    """


class AmbiguousSqrt(GaussianError, UserWarning):
    """Δ has a -1 eigenspace, so its square root is not unique."""


class NonNormalizable(GaussianError):
    pass


class NotInGroup(GaussianError):
    pass


class PureModeDivergence(GaussianError):
    """Modular data diverges because some modes are pure."""

    def __init__(self, message, modes=()):
        super().__init__(message)
        self.modes = tuple(modes)


class SingularDistribution(GaussianError):
    pass


class SingularPositionBlock(GaussianError):
    pass


class NotPositive(GaussianError):
    pass


class DegeneratePairing(GaussianError):
    pass


class InsufficientAncilla(GaussianError):
    pass


class StepUnderflow(GaussianError):
    pass


class DegenerateSymplecticForm(GaussianError):
    pass


class SingularSpectrum(GaussianError, UserWarning):
    """An entropy eigenvalue sits on the log singularity and was clamped."""


class TooManyModes(GaussianError):
    pass
