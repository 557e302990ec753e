"""Exception types shared across the toolkit."""


class LedleakError(Exception):
    """Base class for all toolkit errors."""


class SampleRateTooLow(LedleakError):
    """Sample rate is insufficient for the requested operation."""


class FlatSignal(LedleakError):
    """Waveform has no usable dynamic range (unmodulated, or below the noise floor)."""


class NoStartEdge(LedleakError):
    """No start-bit edge found; the line appears idle."""


class LengthMismatch(LedleakError):
    """Waveforms do not cover the same duration."""


class InsufficientTransitions(LedleakError):
    """Too few level transitions for a timing estimate."""


class NoDominantPeak(LedleakError):
    """Transition-time spectrum shows no clear periodicity."""


class AmplitudeMismatch(LedleakError):
    """Summed waveform does not sit near integer multiples of the unit amplitude."""


class AmbiguousAlignment(LedleakError):
    """Demixing hit a boundary where stream assignment is not unique.

    Instances are collected on DemixResult.ambiguity_flags rather than
    raised, so a best-effort separation is still returned.
    """

    def __init__(self, time: float, detail: str):
        super().__init__(f"at {time:.6g} s: {detail}")
        self.time = time
        self.detail = detail


class ClockSlipDetected(LedleakError):
    """A self-clocking decode lost bit-boundary phase."""


class FramingError(LedleakError):
    """Frame validation failed while deframing a covert transmission."""


class UnknownScanCode(LedleakError):
    """A recovered scan code is not in the bundled translation table.

    Collected on the decode report rather than raised; the event keeps
    its raw code.
    """

    def __init__(self, code: int, time: float):
        super().__init__(f"scan code 0x{code:02X} at {time:.6g} s has no translation")
        self.code = code
        self.time = time


class ConfigError(LedleakError):
    """Configuration file could not be parsed or is missing required keys."""
