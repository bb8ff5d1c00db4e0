"""Exception hierarchy shared by every spectrascope module."""


class SpectrascopeError(Exception):
    """Base class for all library errors."""


class ConfigError(SpectrascopeError):
    pass


class ModelValidationError(SpectrascopeError):
    """A process model violates a structural or numerical invariant."""


class AlphabetMismatchError(SpectrascopeError):
    pass


class EmptyPathError(SpectrascopeError):
    pass


class EnumerationCapError(SpectrascopeError):
    """An exact enumeration would exceed the configured state cap."""

    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: {size} states exceeds enumeration cap {cap}")
        self.size = size
        self.cap = cap


class UnsupportedModelError(SpectrascopeError):
    pass


class EntropyRateUnavailableError(SpectrascopeError):
    pass


class IncomparableGridsError(SpectrascopeError):
    pass


class RegularityError(SpectrascopeError):
    pass


class CodeValidationError(SpectrascopeError):
    pass


class PathTooShortError(SpectrascopeError):
    pass


class ZeroProbabilityError(SpectrascopeError):
    pass


class SchemaError(SpectrascopeError):
    """A JSON document does not match the expected schema."""
