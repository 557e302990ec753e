"""Indicator LED emission and the pulse-stretcher countermeasure.

An indicator wired across the line lights on the space (logical 0)
excursions, so the LED is dark while the line idles.  The optical rise
and fall are modeled as single-pole exponentials; with a 10-90% rise
time below half a unit interval the emitted light tracks individual
bits and the data is recoverable off the glow.

The stretcher models the defensive driver circuit: a retriggerable
monostable that forces every lit interval to last at least `min_on`.
Holding pulses past 1.5 unit intervals pushes the release across the
next mid-bit decision instant, so a downstream decoder misreads; the
most conservative variant holds for a full character interval and
leaves only character-presence timing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SampleRateTooLow
from .lineproto import FrameFormat, Level, LineWaveform, character_interval, unit_interval
from .signals import OpticalWaveform

# single-pole step: the 10% -> 90% interval spans ln(9) time constants
_LN9 = math.log(9.0)

_POLARITIES = ("lit_on_space", "lit_on_mark")


@dataclass(frozen=True)
class LedModel:
    """Optical behavior of one indicator LED."""

    rise_time_10_90: float
    fall_time_10_90: float
    peak_intensity: float
    polarity: str = "lit_on_space"
    wavelength_nm: float = 650.0

    def __post_init__(self) -> None:
        if self.rise_time_10_90 <= 0 or self.fall_time_10_90 <= 0:
            raise ValueError("rise and fall times must be positive")
        if self.peak_intensity <= 0:
            raise ValueError("peak_intensity must be positive")
        if self.polarity not in _POLARITIES:
            raise ValueError(f"polarity must be one of {_POLARITIES}")

    @property
    def lit_level(self) -> Level:
        return Level.SPACE if self.polarity == "lit_on_space" else Level.MARK

    def tracks_bits(self, fmt: FrameFormat) -> bool:
        """Fast enough that individual bit cells survive in the light."""
        return self.rise_time_10_90 < 0.5 * unit_interval(fmt)


def drive(line: LineWaveform, led: LedModel, sample_rate: float) -> OpticalWaveform:
    """Radiant intensity of `led` driven by `line`, sampled at `sample_rate`.

    Piecewise-exact single-pole response: within each constant-level
    segment the intensity relaxes exponentially toward 0 or
    `peak_intensity` with the rise or fall time constant.  Requires at
    least 10 samples across the shortest pulse on the line.
    """
    min_seg = line.min_segment()
    if min_seg > 0 and sample_rate * min_seg < 10.0 - 1e-9:
        raise SampleRateTooLow(
            f"sample_rate {sample_rate:g} gives {sample_rate * min_seg:.2f} samples over the "
            f"shortest {min_seg:g} s pulse; need at least 10"
        )
    n = int(round(line.duration * sample_rate))
    out = np.empty(n)
    t = np.arange(n) / sample_rate

    tau_rise = led.rise_time_10_90 / _LN9
    tau_fall = led.fall_time_10_90 / _LN9
    lit = led.lit_level

    bounds = [0.0] + [tt for tt, _ in line.transitions] + [line.duration]
    levels = [line.initial_level] + [lvl for _, lvl in line.transitions]

    # the LED has settled to the initial level before t=0
    y = led.peak_intensity if levels[0] is lit else 0.0
    for seg in range(len(levels)):
        t_a, t_b = bounds[seg], bounds[seg + 1]
        target = led.peak_intensity if levels[seg] is lit else 0.0
        tau = tau_rise if target > y else tau_fall
        i_a = int(np.searchsorted(t, t_a, side="left"))
        i_b = int(np.searchsorted(t, t_b, side="left"))
        if i_b > i_a:
            out[i_a:i_b] = target + (y - target) * np.exp(-(t[i_a:i_b] - t_a) / tau)
        y = target + (y - target) * math.exp(-(t_b - t_a) / tau)
    return OpticalWaveform(sample_rate, out)


@dataclass(frozen=True)
class StretcherConfig:
    """Retriggerable-monostable hold applied by the LED driver.

    `min_on` is the minimum lit duration in seconds; each lit onset
    (re)starts the hold timer.  `min_off`, when set, additionally merges
    dark gaps shorter than itself into the surrounding lit interval.
    """

    min_on: float
    min_off: float | None = None
    mode: str = "unit_interval_multiple"

    def __post_init__(self) -> None:
        if self.min_on <= 0:
            raise ValueError("min_on must be positive")
        if self.min_off is not None and self.min_off <= 0:
            raise ValueError("min_off must be positive when set")


def stretcher_for_format(fmt: FrameFormat, multiple: float = 1.5, min_off_units: float | None = None) -> StretcherConfig:
    """Hold configured as a multiple of the unit interval (1.5 and 2 are the usual choices)."""
    ui = unit_interval(fmt)
    min_off = None if min_off_units is None else min_off_units * ui
    return StretcherConfig(min_on=multiple * ui, min_off=min_off, mode="unit_interval_multiple")


def conservative_stretcher(fmt: FrameFormat) -> StretcherConfig:
    """Most conservative variant: hold for a full character interval."""
    return StretcherConfig(min_on=character_interval(fmt), mode="character_interval")


def stretch(line: LineWaveform, cfg: StretcherConfig) -> LineWaveform:
    """Apply the stretcher to a line waveform.

    Space (lit) excursions are extended to at least `min_on` seconds and
    never shortened; onsets are preserved.  Pure idle passes through
    unchanged.  When a stretched release runs past the original end of
    the waveform, the duration grows to keep the trailing mark segment.
    """
    intervals = line.space_intervals()
    if not intervals:
        return line

    stretched = [(a, max(b, a + cfg.min_on)) for a, b in intervals]

    merged: list[tuple[float, float]] = []
    for a, b in stretched:
        if merged:
            gap = a - merged[-1][1]
            limit = cfg.min_off if cfg.min_off is not None else 0.0
            if gap <= limit:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
                continue
        merged.append((a, b))

    duration = line.duration
    if merged[-1][1] >= duration:
        duration = merged[-1][1] + 0.5 * cfg.min_on

    transitions: list[tuple[float, Level]] = []
    initial = Level.MARK
    rest = merged
    if merged[0][0] == 0.0:
        # waveform opens mid-pulse; stay lit until the stretched release
        initial = Level.SPACE
        transitions.append((merged[0][1], Level.MARK))
        rest = merged[1:]
    for a, b in rest:
        transitions.append((a, Level.SPACE))
        transitions.append((b, Level.MARK))
    return LineWaveform(initial, tuple(transitions), duration)


class TimingCapacity(NamedTuple):
    """Residual covert signalling capacity behind a character-interval stretcher.

    `literal_ratio` is (t_ui / t_char)^-1, a dimensionless count of unit
    intervals per character; `per_character_rate` is 1 / t_char in
    characters (hence bits, at one bit per presence pulse) per second.
    """

    literal_ratio: float
    per_character_rate: float


def residual_timing_capacity(fmt: FrameFormat) -> TimingCapacity:
    """Covert rate limit once pulses are stretched to the character interval."""
    t_ui = unit_interval(fmt)
    t_char = character_interval(fmt)
    return TimingCapacity(literal_ratio=t_char / t_ui, per_character_rate=1.0 / t_char)
