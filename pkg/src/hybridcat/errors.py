"""Exception types raised by the simulator."""


class HybridCatError(Exception):
    """Base class for all errors raised by this package."""


class DuplicateMode(HybridCatError):
    pass


class ZeroCutoff(HybridCatError):
    pass


class UnknownMode(HybridCatError):
    pass


class SpaceMismatch(HybridCatError):
    pass


class OverlappingModes(HybridCatError):
    pass


class CutoffExceeded(HybridCatError):
    pass


class CutoffTooSmall(HybridCatError):
    pass


class MemoryGuardExceeded(CutoffTooSmall):
    """Total dimension would exceed the configured amplitude budget."""


class NotNormalized(HybridCatError):
    pass


class DegenerateAmplitude(HybridCatError):
    pass


class TapNotVacuum(HybridCatError):
    pass


class OutputNotVacuum(HybridCatError):
    pass


class BadReflectivity(HybridCatError):
    pass


class BadEta(HybridCatError):
    pass


class BadPartition(HybridCatError):
    pass


class MultiModeInput(HybridCatError):
    pass


class ConfigError(HybridCatError):
    """Invalid experiment configuration; carries the offending field name."""

    def __init__(self, field, message):
        super().__init__(f"config field '{field}': {message}")
        self.field = field
