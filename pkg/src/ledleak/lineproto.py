"""EIA/TIA-232-E asynchronous serial line waveforms.

Models RS-232-style async framing (start / data / optional parity / stop)
as piecewise-constant two-level waveforms with exact transition times.
The line idles at mark (logical 1); a character begins with a one-unit
space (logical 0) start bit, data bits follow least-significant first,
and the stop element returns the line to mark for 1, 1.5, or 2 unit
intervals.

Sampling convention: a waveform's level at the exact instant of a
transition is the level *before* that transition (levels hold over the
half-open interval (t_prev, t]).  A sampler that lands precisely on a
falling edge therefore still sees the pulse.  Downstream stages (mid-bit
decoders, pulse-stretcher analysis) rely on this being consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

_STANDARD_DATA_BITS = (5, 6, 7, 8)
_STANDARD_STOP_UNITS = (1.0, 1.5, 2.0)
_PARITY_MODES = ("none", "even", "odd")

#: Rates an eavesdropper would try first when probing an unknown line.
CANDIDATE_RATES = (300.0, 600.0, 1200.0, 2400.0, 4800.0, 9600.0, 19200.0)


class Level(Enum):
    """Line level.  MARK is logical 1 and the idle state; SPACE is logical 0."""

    MARK = "mark"
    SPACE = "space"

    def invert(self) -> "Level":
        return Level.SPACE if self is Level.MARK else Level.MARK


@dataclass(frozen=True)
class FrameFormat:
    """Asynchronous character format (rate, data bits, parity, stop units)."""

    bit_rate: float
    data_bits: int = 8
    parity: str = "none"
    stop_units: float = 1.0

    def __post_init__(self) -> None:
        if not (self.bit_rate > 0 and math.isfinite(self.bit_rate)):
            raise ValueError(f"bit_rate must be positive and finite, got {self.bit_rate}")
        if self.data_bits not in _STANDARD_DATA_BITS:
            raise ValueError(f"data_bits must be one of {_STANDARD_DATA_BITS}, got {self.data_bits}")
        if self.parity not in _PARITY_MODES:
            raise ValueError(f"parity must be one of {_PARITY_MODES}, got {self.parity!r}")
        if float(self.stop_units) not in _STANDARD_STOP_UNITS:
            raise ValueError(f"stop_units must be one of {_STANDARD_STOP_UNITS}, got {self.stop_units}")

    @property
    def parity_bits(self) -> int:
        return 0 if self.parity == "none" else 1

    @property
    def units_per_character(self) -> float:
        """Character length in unit intervals, including start and stop."""
        return 1 + self.data_bits + self.parity_bits + self.stop_units

    @property
    def unit_interval(self) -> float:
        """Duration of one bit cell in seconds."""
        return 1.0 / self.bit_rate

    @property
    def character_interval(self) -> float:
        """Duration of one complete character (start through stop) in seconds."""
        return self.units_per_character / self.bit_rate


def unit_interval(fmt: FrameFormat) -> float:
    """Duration of one bit cell in seconds."""
    return fmt.unit_interval


def character_interval(fmt: FrameFormat) -> float:
    """Duration of one complete character (start through stop) in seconds."""
    return fmt.character_interval


def parity_bit(byte: int, fmt: FrameFormat) -> int:
    """Parity bit value transmitted after the data bits of `byte`."""
    if fmt.parity == "none":
        raise ValueError("format has no parity bit")
    ones = bin(byte & ((1 << fmt.data_bits) - 1)).count("1")
    if fmt.parity == "even":
        return ones & 1
    return 1 - (ones & 1)


@dataclass(frozen=True)
class LineWaveform:
    """Piecewise-constant two-level waveform with exact transition times.

    `transitions` lists (time, new_level) pairs with strictly increasing
    times inside [0, duration); consecutive levels must alternate.
    """

    initial_level: Level
    transitions: tuple[tuple[float, Level], ...]
    duration: float

    def __post_init__(self) -> None:
        if self.duration < 0 or not math.isfinite(self.duration):
            raise ValueError(f"duration must be finite and non-negative, got {self.duration}")
        prev_t = -math.inf
        prev_lvl = self.initial_level
        for t, lvl in self.transitions:
            if not (t > prev_t or (prev_t == -math.inf and t >= 0.0)):
                raise ValueError(f"transition times must be strictly increasing, got {t} after {prev_t}")
            if t < 0.0 or t >= self.duration:
                raise ValueError(f"transition at {t} outside [0, {self.duration})")
            if lvl is prev_lvl:
                raise ValueError(f"consecutive levels must alternate at t={t}")
            prev_t = t
            prev_lvl = lvl

    @cached_property
    def _times(self) -> np.ndarray:
        return np.array([t for t, _ in self.transitions], dtype=float)

    @cached_property
    def _space_after(self) -> np.ndarray:
        # element j: is the line at SPACE after transition j; element 0 is the initial level
        flags = [self.initial_level is Level.SPACE]
        flags.extend(lvl is Level.SPACE for _, lvl in self.transitions)
        return np.array(flags, dtype=bool)

    @property
    def final_level(self) -> Level:
        return self.transitions[-1][1] if self.transitions else self.initial_level

    def level_at(self, t: float) -> Level:
        """Level at time t (left-continuous: an edge at t is not yet taken)."""
        idx = int(np.searchsorted(self._times, t, side="left"))
        return Level.SPACE if self._space_after[idx] else Level.MARK

    def space_at(self, times: np.ndarray) -> np.ndarray:
        """Vectorized left-continuous sampling; True where the line is at SPACE."""
        idx = np.searchsorted(self._times, np.asarray(times, dtype=float), side="left")
        return self._space_after[idx]

    def space_intervals(self) -> list[tuple[float, float]]:
        """Closed-open [onset, release) intervals where the line sits at SPACE."""
        out: list[tuple[float, float]] = []
        cur_start: float | None = 0.0 if self.initial_level is Level.SPACE else None
        for t, lvl in self.transitions:
            if lvl is Level.SPACE:
                cur_start = t
            elif cur_start is not None:
                out.append((cur_start, t))
                cur_start = None
        if cur_start is not None:
            out.append((cur_start, self.duration))
        return out

    def min_segment(self) -> float:
        """Shortest constant-level segment, in seconds."""
        if not self.transitions:
            return self.duration
        bounds = np.concatenate(([0.0], self._times, [self.duration]))
        gaps = np.diff(bounds)
        gaps = gaps[gaps > 0]
        return float(gaps.min()) if gaps.size else self.duration


def _from_segments(segments: list[tuple[float, Level]], initial: Level) -> LineWaveform:
    """Fold a (duration, level) run list into a transition-form waveform."""
    transitions: list[tuple[float, Level]] = []
    t = 0.0
    current = initial
    for dur, lvl in segments:
        if dur <= 0:
            continue
        if lvl is not current:
            transitions.append((t, lvl))
            current = lvl
        t += dur
    return LineWaveform(initial, tuple(transitions), t)


def encode(
    payload: bytes,
    fmt: FrameFormat,
    inter_char_idle: float = 0.0,
    lead_in: float = 0.0,
) -> LineWaveform:
    """Serialize `payload` into a line waveform.

    Each character is start bit (space), data bits LSB first (bit 1 at
    mark, bit 0 at space), optional parity bit, and a mark stop element
    of `stop_units` unit intervals, followed by `inter_char_idle`
    seconds at mark.  An empty payload yields pure idle of the requested
    idle duration.  `lead_in` prepends idle before the first character.
    """
    if inter_char_idle < 0 or lead_in < 0:
        raise ValueError("idle durations must be non-negative")
    ui = unit_interval(fmt)
    segments: list[tuple[float, Level]] = []
    if lead_in > 0:
        segments.append((lead_in, Level.MARK))
    for byte in payload:
        if byte < 0 or byte >= (1 << fmt.data_bits):
            raise ValueError(f"byte {byte:#x} does not fit in {fmt.data_bits} data bits")
        segments.append((ui, Level.SPACE))
        for k in range(fmt.data_bits):
            bit = (byte >> k) & 1
            segments.append((ui, Level.MARK if bit else Level.SPACE))
        if fmt.parity != "none":
            p = parity_bit(byte, fmt)
            segments.append((ui, Level.MARK if p else Level.SPACE))
        segments.append((fmt.stop_units * ui, Level.MARK))
        if inter_char_idle > 0:
            segments.append((inter_char_idle, Level.MARK))
    if not payload:
        return LineWaveform(Level.MARK, (), lead_in + inter_char_idle)
    return _from_segments(segments, Level.MARK)


def decision_points(fmt: FrameFormat, frame_start: float) -> np.ndarray:
    """Mid-bit sampling instants for one character starting at `frame_start`.

    One instant per full bit cell at frame_start + (n + 1/2) * t_ui,
    covering start, data, parity, and stop bits.
    """
    ui = unit_interval(fmt)
    n_cells = 1 + fmt.data_bits + fmt.parity_bits + int(math.floor(fmt.stop_units))
    return frame_start + (np.arange(n_cells) + 0.5) * ui


def frame_bits(byte: int, fmt: FrameFormat) -> list[int]:
    """Logical bit values sampled across one character: start, data, parity, stop."""
    bits = [0]
    bits.extend((byte >> k) & 1 for k in range(fmt.data_bits))
    if fmt.parity != "none":
        bits.append(parity_bit(byte, fmt))
    bits.extend([1] * int(math.floor(fmt.stop_units)))
    return bits
