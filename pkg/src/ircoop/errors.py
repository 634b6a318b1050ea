"""Exception hierarchy shared by every module of the package."""


class IrcoopError(Exception):
    """Base class for all package errors."""


class DomainError(IrcoopError, ValueError):
    """An argument lies outside the domain of the requested function."""


class UnsupportedMeasure(IrcoopError):
    """The requested channel measure is not defined for this channel kind."""


class SpectrumFormatError(IrcoopError, ValueError):
    """A weight-spectrum file or object is malformed."""


class RateBoundViolation(IrcoopError, ValueError):
    """The UB threshold of a spectrum is below -ln(1 - R); the spectrum cannot
    belong to a good code ensemble."""


class InfeasibleSpectrum(IrcoopError):
    """No weight partition satisfies the simple-threshold constraint."""


class NotSelfDecodable(IrcoopError, ValueError):
    """The survival fraction is at or below 1 - exp(-c_star)."""


class NotReliable(IrcoopError, ValueError):
    """The instantaneous SNR does not exceed the punctured threshold."""


class MarginTooLarge(IrcoopError, ValueError):
    """The safety margin pushes the listen fraction out of its feasible interval."""


class TooManyHelpers(IrcoopError, ValueError):
    """Exhaustive enumeration over reliable sets is capped at M = 20."""


class InvalidMember(IrcoopError, ValueError):
    """A reliable set names a node that is not a helper."""


class InvalidGeometry(IrcoopError, ValueError):
    """Distances or SNR profile are unusable for the requested computation."""


class AssumptionViolated(IrcoopError, ValueError):
    """A closed form is requested outside the parameter range it was derived for."""


class HypothesisViolated(IrcoopError, ValueError):
    """Assignment rates violate the self-decodable hypothesis of an asymptotic bound."""


class InsufficientRange(IrcoopError, ValueError):
    """A curve does not span enough SNR range for a slope fit."""


class InfeasibleTauRange(IrcoopError, ValueError):
    """No broadcast-slot fraction keeps every block self-decodable."""


class ScenarioFormatError(IrcoopError, ValueError):
    """A scenario file violates its schema."""
