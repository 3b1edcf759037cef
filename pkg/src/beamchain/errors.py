"""Exception types shared across the package."""


class BeamchainError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(BeamchainError, ValueError):
    """A scalar argument lies outside its allowed domain."""


class InvalidLevelError(InvalidParameterError):
    """A requested Fock level exceeds the cutoff."""


class ShapeError(BeamchainError, ValueError):
    """Operands have incompatible shapes, mode counts, or cutoffs."""


class CutoffTooSmallError(BeamchainError):
    """A truncation tail guard tripped: the cutoff cannot hold the state."""


class ResourceLimitError(BeamchainError):
    """A requested object exceeds the configured dimension guard."""


class UnphysicalStateError(BeamchainError):
    """A state violates positivity or an uncertainty bound beyond tolerance."""


class NumericalInstabilityError(BeamchainError):
    """A numerical estimate failed its internal consistency check."""


class EstimationError(NumericalInstabilityError):
    """An empirical derivative or tail bound could not be formed."""


class ConfigError(BeamchainError):
    """A scenario configuration failed to parse or validate."""

    def __init__(self, message, field=None, line=None, column=None):
        super().__init__(message)
        self.field = field
        self.line = line
        self.column = column
