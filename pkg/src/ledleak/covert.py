"""Keyboard-LED covert channel: schedule encoders, decoders, scan codes.

The three lock indicators on a standard keyboard are software
controlled, and the interface that drives them has far more capacity
than a typist ever uses.  A resident program can therefore blink
message bits out through the room at rates that are hard to notice from
the chair but easy to read from a photodetector.

Everything here is pure data transformation.  An encoder turns bytes
into a timed LED schedule (what to switch, and when); the schedule can
be rendered into logical line waveforms, pushed through the emitter and
channel models, and read back by the matching decoder.  No sleeps, no
hardware.

Four schemes are modeled.  ``single_async`` is the classic one-LED
transmitter: one start symbol (LED on), eight data symbols least
significant bit first, one stop symbol (LED off), every symbol held for
one full period.  Note the polarity is the reverse of a serial data
line: here the start element lights the LED.  ``tri_parallel`` deals
consecutive bits of that same framed stream across Caps, Num and Scroll
Lock in rotation, tripling the aggregate rate for the same per-LED
switching speed.  ``sync_serial`` puts a return-to-zero clock on Num
Lock and the data bits on Caps Lock, so the receiver samples on clock
falling edges and needs no frame structure at all.  ``diff_manchester``
drives all three LEDs with one differential waveform: a transition at
every bit boundary, plus a mid-bit transition for one of the two bit
values.  Only transition *times* carry information, so a receiver that
sees any of the three LEDs, even with inverted sense, reads the same
bits.

The hardware variant skips software entirely: the Scroll Lock LED is
rewired to the keyboard data signal (inverted, so the line's idle state
leaves the LED dark) and every scan code the keyboard clocks out
becomes an 11-unit optical burst: start, eight data bits LSB first, odd
parity, stop.  scan_stream() and decode_scan() model both directions,
including the break prefix byte 0xF0 that precedes a key release.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .configio import Config, defaults
from .errors import (
    ClockSlipDetected,
    ConfigError,
    FlatSignal,
    FramingError,
    NoStartEdge,
    UnknownScanCode,
)
from .lineproto import FrameFormat, Level, LineWaveform, encode as encode_line
from .receiver import binarize, decode
from .signals import DetectorWaveform, OpticalWaveform

LED_NAMES = ("caps", "num", "scroll")
SCHEME_KINDS = ("single_async", "tri_parallel", "sync_serial", "diff_manchester")
RATE_RANGE = (1.0, 10000.0)
SCAN_RATE_RANGE = (8000.0, 16700.0)

BREAK_PREFIX = 0xF0
_SCAN_TABLE_FILE = "scancodes.txt"
_SCAN_UNITS = 11  # start + 8 data + odd parity + stop


@dataclass(frozen=True)
class LedScheduleEvent:
    """Switch one set of keyboard LEDs at one instant."""

    time: float
    led: frozenset[str]
    state: str

    def __post_init__(self) -> None:
        if self.time < 0.0 or not math.isfinite(self.time):
            raise ValueError(f"event time must be finite and non-negative, got {self.time}")
        if not self.led:
            raise ValueError("event must name at least one LED")
        unknown = set(self.led) - set(LED_NAMES)
        if unknown:
            raise ValueError(f"unknown LED names {sorted(unknown)}")
        if self.state not in ("on", "off"):
            raise ValueError(f"state must be 'on' or 'off', got {self.state!r}")


@dataclass(frozen=True)
class CovertScheme:
    """Transmission scheme and its aggregate bit rate."""

    kind: str
    rate: float

    def __post_init__(self) -> None:
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"kind must be one of {SCHEME_KINDS}, got {self.kind!r}")
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    @property
    def per_led_rate(self) -> float:
        """Bits per second each LED carries; a third of aggregate when parallel."""
        return self.rate / 3.0 if self.kind == "tri_parallel" else self.rate


@dataclass(frozen=True)
class ScanCodeEvent:
    """One key transition on the keyboard interface."""

    code: int
    kind: str
    time: float

    def __post_init__(self) -> None:
        if not 0 <= self.code <= 0xFF:
            raise ValueError(f"scan code {self.code:#x} outside one byte")
        if self.kind not in ("make", "break"):
            raise ValueError(f"kind must be 'make' or 'break', got {self.kind!r}")
        if self.time < 0.0 or not math.isfinite(self.time):
            raise ValueError(f"event time must be finite and non-negative, got {self.time}")


def _framed_bits(text: bytes) -> list[int]:
    """start(1) + data LSB first + stop(0) per byte, as one flat stream."""
    bits: list[int] = []
    for byte in text:
        bits.append(1)
        bits.extend((byte >> i) & 1 for i in range(8))
        bits.append(0)
    return bits


def _raw_bits(text: bytes) -> list[int]:
    bits: list[int] = []
    for byte in text:
        bits.extend((byte >> i) & 1 for i in range(8))
    return bits


def _restore_events(t: float, initial: frozenset[str]) -> list[LedScheduleEvent]:
    """Put every LED back the way it was found.

    With the usual all-dark initial state this is a single event; a
    mixed saved state needs an off-group and an on-group, of which the
    final event restores the LEDs that were lit.
    """
    events = []
    dark = frozenset(LED_NAMES) - initial
    if dark:
        events.append(LedScheduleEvent(t, dark, "off"))
    if initial:
        events.append(LedScheduleEvent(t, frozenset(initial), "on"))
    return events


def _manchester_mid_bit(cfg: Config | None) -> int:
    cfg = cfg or defaults()
    value = int(cfg.number("covert", "manchester_mid_transition_bit", fallback=0.0))
    if value not in (0, 1):
        raise ConfigError(f"manchester_mid_transition_bit must be 0 or 1, got {value}")
    return value


def encode_message(
    text: bytes,
    scheme: CovertScheme,
    *,
    initial_leds: frozenset[str] = frozenset(),
    cfg: Config | None = None,
) -> list[LedScheduleEvent]:
    """Turn bytes into a timed LED switching schedule.

    Every symbol lasts exactly 1/rate seconds, matching a transmitter
    that sets the LEDs and sleeps one full period per bit, start and
    stop included.  The schedule always ends by restoring
    ``initial_leds`` (the state saved before transmission), so an empty
    message produces just that restore.
    """
    lo, hi = RATE_RANGE
    if not lo <= scheme.rate <= hi:
        raise ValueError(f"rate {scheme.rate} outside [{lo:g}, {hi:g}] b/s")
    period = 1.0 / scheme.rate
    events: list[LedScheduleEvent] = []

    if scheme.kind == "single_async":
        bits = _framed_bits(text)
        events = [
            LedScheduleEvent(k * period, frozenset({"caps"}), "on" if b else "off")
            for k, b in enumerate(bits)
        ]
        end = len(bits) * period

    elif scheme.kind == "tri_parallel":
        bits = _framed_bits(text)
        events = [
            LedScheduleEvent(
                k * period, frozenset({LED_NAMES[k % 3]}), "on" if b else "off"
            )
            for k, b in enumerate(bits)
        ]
        end = len(bits) * period

    elif scheme.kind == "sync_serial":
        bits = _raw_bits(text)
        for k, b in enumerate(bits):
            t = k * period
            events.append(LedScheduleEvent(t, frozenset({"caps"}), "on" if b else "off"))
            events.append(LedScheduleEvent(t, frozenset({"num"}), "on"))
            events.append(LedScheduleEvent(t + 0.5 * period, frozenset({"num"}), "off"))
        end = len(bits) * period

    else:  # diff_manchester
        mid_bit = _manchester_mid_bit(cfg)
        bits = _raw_bits(text)
        all_leds = frozenset(LED_NAMES)
        state = False
        for k, b in enumerate(bits):
            state = not state
            events.append(LedScheduleEvent(k * period, all_leds, "on" if state else "off"))
            if b == mid_bit:
                state = not state
                events.append(
                    LedScheduleEvent((k + 0.5) * period, all_leds, "on" if state else "off")
                )
        if bits:
            # closing boundary, so the receiver sees one transition per boundary
            state = not state
            events.append(
                LedScheduleEvent(len(bits) * period, all_leds, "on" if state else "off")
            )
        end = len(bits) * period

    events.extend(_restore_events(end if text else 0.0, initial_leds))
    return events


def schedule_to_lines(
    events: list[LedScheduleEvent],
    *,
    lead: float = 0.0,
    tail: float = 0.0,
) -> dict[str, LineWaveform]:
    """Render a schedule into one logical line waveform per LED.

    A lit LED maps to the space level, matching the indicator wiring
    used everywhere else in the pipeline.  ``lead`` seconds of dark idle
    are prepended (receivers that estimate the background need settling
    room before the first edge) and ``tail`` appended.  Events at the
    same instant apply in list order, and only the net state change
    becomes a transition.
    """
    if not events:
        raise ValueError("schedule is empty")
    if lead < 0 or tail < 0:
        raise ValueError("lead and tail must be non-negative")
    end = lead + max(e.time for e in events) + tail
    lines: dict[str, LineWaveform] = {}
    for name in LED_NAMES:
        state = False
        transitions: list[tuple[float, Level]] = []
        for event in events:
            if name not in event.led:
                continue
            t = lead + event.time
            new = event.state == "on"
            if new == state:
                continue
            level = Level.SPACE if new else Level.MARK
            if transitions and transitions[-1][0] == t:
                # same-instant override: keep only the net change
                transitions.pop()
                if transitions and (transitions[-1][1] is level):
                    state = new
                    continue
                if not transitions and level is Level.MARK:
                    state = new
                    continue
            if t >= end:
                state = new
                continue
            transitions.append((t, level))
            state = new
        lines[name] = LineWaveform(Level.MARK, tuple(transitions), max(end, 1e-9))
    return lines


def save_schedule(path: str, events: list[LedScheduleEvent]) -> None:
    """Write a schedule as replayable delimited text: time, LEDs, state."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# time_s led state\n")
        for e in events:
            fh.write(f"{e.time:.17g} {'+'.join(sorted(e.led))} {e.state}\n")


def load_schedule(path: str) -> list[LedScheduleEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3:
                raise ConfigError(f"{path}:{lineno}: expected 'time led state', got {text!r}")
            time_s, led, state = parts
            events.append(
                LedScheduleEvent(float(time_s), frozenset(led.split("+")), state)
            )
    return events


# --- decoding ----------------------------------------------------------------


def _as_line(wave) -> LineWaveform | None:
    """Threshold one captured waveform; a dark or flat LED yields None."""
    detector = DetectorWaveform(wave.sample_rate, np.asarray(wave.samples, dtype=float))
    try:
        return binarize(detector)
    except FlatSignal:
        return None


def _lit_at(line: LineWaveform | None, times: np.ndarray) -> np.ndarray:
    if line is None:
        return np.zeros(len(times), dtype=bool)
    inside = times < line.duration
    out = np.zeros(len(times), dtype=bool)
    if inside.any():
        out[inside] = line.space_at(times[inside])
    return out


def _first_onset(lines: list[LineWaveform | None]) -> float:
    onsets = []
    for line in lines:
        if line is None:
            continue
        for t, level in line.transitions:
            if level is Level.SPACE:
                onsets.append(t)
                break
    if not onsets:
        raise FramingError("no LED ever lit; nothing to decode")
    return min(onsets)


def _bits_to_bytes(bits: list[int]) -> bytes:
    out = bytearray()
    for i in range(0, len(bits), 8):
        value = 0
        for j, b in enumerate(bits[i : i + 8]):
            value |= b << j
        out.append(value)
    return bytes(out)


def decode_message(
    per_led,
    scheme: CovertScheme,
    *,
    cfg: Config | None = None,
) -> bytes:
    """Read a covert transmission back out of three captured waveforms.

    ``per_led`` holds the Caps, Num and Scroll Lock captures in that
    order, time-aligned; any uniformly sampled intensity or voltage
    record works.  Each is thresholded independently (a flat capture is
    treated as a dark LED), then deframed per the scheme.  Raises
    FramingError when the frame structure does not hold and
    ClockSlipDetected when a differential decode loses the bit lattice.

    Pass raw detector captures, not background-suppressed ones.  At
    covert rates the mains flicker sits inside the signal band, so the
    usual high-pass conditioning would gut the plateaus the thresholder
    relies on; the adaptive threshold carries the background instead.
    """
    if len(per_led) != 3:
        raise ValueError("need exactly three waveforms: caps, num, scroll")
    lines = [_as_line(w) for w in per_led]
    period = 1.0 / scheme.rate

    if scheme.kind == "single_async":
        return _decode_async(lines[0], period)
    if scheme.kind == "tri_parallel":
        return _decode_tri(lines, period)
    if scheme.kind == "sync_serial":
        return _decode_sync(lines[0], lines[1], period)
    return _decode_manchester(lines, period, _manchester_mid_bit(cfg))


def _decode_async(caps: LineWaveform | None, period: float) -> bytes:
    if caps is None:
        raise FramingError("caps lock capture is flat; nothing to decode")
    t0 = _first_onset([caps])
    bits: list[int] = []
    char = 0
    while True:
        base = t0 + 10 * char * period
        mids = base + (np.arange(10) + 0.5) * period
        if mids[-1] >= caps.duration:
            break
        symbols = _lit_at(caps, mids)
        if not symbols[0]:
            if symbols.any():
                raise FramingError(f"start symbol dark at {base:.6g} s")
            break
        if symbols[9]:
            raise FramingError(f"stop symbol lit at {base:.6g} s")
        bits.extend(int(b) for b in symbols[1:9])
        char += 1
    return _bits_to_bytes(bits)


def _decode_tri(lines: list[LineWaveform | None], period: float) -> bytes:
    t0 = _first_onset(lines)
    duration = max(line.duration for line in lines if line is not None)
    bits: list[int] = []
    char = 0
    while True:
        ks = 10 * char + np.arange(10)
        mids = t0 + (ks + 0.5) * period
        if mids[-1] >= duration:
            break
        symbols = np.array(
            [_lit_at(lines[int(k) % 3], np.array([m]))[0] for k, m in zip(ks, mids)]
        )
        if not symbols[0]:
            if symbols.any():
                raise FramingError(f"start symbol dark at {mids[0]:.6g} s")
            break
        if symbols[9]:
            raise FramingError(f"stop symbol lit at {mids[0] + 9 * period:.6g} s")
        bits.extend(int(b) for b in symbols[1:9])
        char += 1
    return _bits_to_bytes(bits)


def _decode_sync(
    caps: LineWaveform | None, num: LineWaveform | None, period: float
) -> bytes:
    if num is None:
        raise FramingError("no clock activity on num lock")
    falling = [b for _, b in num.space_intervals()]
    if not falling:
        raise FramingError("no clock pulses on num lock")
    samples = np.asarray(falling)
    bits = [int(v) for v in _lit_at(caps, samples)]
    if len(bits) % 8 != 0:
        raise FramingError(f"{len(bits)} clocked bits is not a whole number of bytes")
    return _bits_to_bytes(bits)


def _decode_manchester(
    lines: list[LineWaveform | None], period: float, mid_bit: int
) -> bytes:
    # all three LEDs carry the same differential waveform; information
    # lives in the transition times alone, so an inverted capture reads
    # identically and the busiest LED is as good as any
    candidates = [line for line in lines if line is not None and line.transitions]
    if not candidates:
        raise FramingError("no transitions on any LED")
    line = max(candidates, key=lambda ln: len(ln.transitions))
    times = np.array([t for t, _ in line.transitions])
    t0 = times[0]
    half = 0.5 * period
    slots = (times - t0) / half
    snapped = np.round(slots)
    if np.any(np.abs(slots - snapped) > 0.5 * 0.5):
        worst = float(np.max(np.abs(slots - snapped)) * half)
        raise ClockSlipDetected(
            f"transition off the half-period lattice by {worst:.3g} s"
        )
    occupied = set(int(s) for s in snapped)
    n_bits = int(round((times[-1] - t0) / period))
    if n_bits <= 0:
        raise FramingError("capture holds no complete bit")
    bits = []
    for k in range(n_bits):
        if 2 * k not in occupied:
            raise ClockSlipDetected(f"missing boundary transition at bit {k}")
        bits.append(mid_bit if 2 * k + 1 in occupied else 1 - mid_bit)
    if len(bits) % 8 != 0:
        raise FramingError(f"{len(bits)} bits is not a whole number of bytes")
    return _bits_to_bytes(bits)


# --- hardware scan-code path ---------------------------------------------


def scan_format(interface_rate: float) -> FrameFormat:
    """Frame format of the keyboard interface word: 8 data, odd parity, 1 stop."""
    return FrameFormat(bit_rate=interface_rate, data_bits=8, parity="odd", stop_units=1.0)


def scan_stream(
    keys: list[ScanCodeEvent],
    interface_rate: float,
    *,
    tail: float | None = None,
) -> LineWaveform:
    """Serialize key events onto the (inverted) keyboard data line.

    Each make sends its scan code as one 11-unit word; each break sends
    the 0xF0 prefix word then the code word.  The line is modeled after
    the LED rewire: a logical 0 on the wire lights the LED, so idle is
    dark and every word is a short burst of flicker.  Words start at
    their event's timestamp unless the line is still busy, in which case
    they queue back to back, the way the keyboard's own controller
    serializes output.
    """
    lo, hi = SCAN_RATE_RANGE
    if not lo <= interface_rate <= hi:
        raise ValueError(f"interface rate {interface_rate} outside [{lo:g}, {hi:g}] b/s")
    fmt = scan_format(interface_rate)
    word = _SCAN_UNITS / interface_rate
    if tail is None:
        tail = word

    made: set[int] = set()
    for event in sorted(keys, key=lambda e: e.time):
        if event.kind == "make":
            made.add(event.code)
        elif event.code not in made:
            raise ValueError(
                f"break of {event.code:#x} at {event.time:.6g} s has no preceding make"
            )

    transitions: list[tuple[float, Level]] = []
    cursor = 0.0
    for event in sorted(keys, key=lambda e: e.time):
        start = max(event.time, cursor)
        codes = [event.code] if event.kind == "make" else [BREAK_PREFIX, event.code]
        for code in codes:
            burst = encode_line(bytes([code]), fmt)
            transitions.extend((start + t, lvl) for t, lvl in burst.transitions)
            start += word
        cursor = start
    return LineWaveform(Level.MARK, tuple(transitions), cursor + tail)


def _load_scan_table() -> dict[int, str]:
    data = resources.files(__package__).joinpath("data", _SCAN_TABLE_FILE).read_text()
    table: dict[int, str] = {}
    for lineno, raw in enumerate(data.splitlines(), start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{_SCAN_TABLE_FILE}:{lineno}: expected 'hex = key'")
        code, _, key = text.partition("=")
        table[int(code.strip(), 16)] = key.strip()
    return table


_scan_table_cache: dict[int, str] | None = None


def scan_table() -> dict[int, str]:
    """Bundled scan-code translation subset (letters, digits, shift, space, enter)."""
    global _scan_table_cache
    if _scan_table_cache is None:
        _scan_table_cache = _load_scan_table()
    return _scan_table_cache


@dataclass(frozen=True)
class ScanDecodeReport:
    """Recovered key events, their translation, and anything suspicious."""

    events: tuple[ScanCodeEvent, ...]
    text: str
    flags: tuple[UnknownScanCode, ...]
    framing: tuple[tuple[str, float], ...]

    @property
    def clean(self) -> bool:
        return not self.flags and not self.framing


def decode_scan(optical, interface_rate: float) -> ScanDecodeReport:
    """Read scan codes and key timing back off a captured keyboard LED.

    Thresholds the capture, deframes 11-unit words, folds 0xF0 prefixes
    into break events, and translates the bundled subset into text
    (shift tracked for letter case).  Codes outside the table are kept
    as events and flagged rather than dropped; a capture with no words
    at all yields an empty report.
    """
    detector = DetectorWaveform(optical.sample_rate, np.asarray(optical.samples, dtype=float))
    fmt = scan_format(interface_rate)
    try:
        # the line is dark except for word bursts, so the usual anchors
        # would sit entirely in the dark mass; reach for the extremes
        line = binarize(detector, percentiles=(0.5, 99.8))
        recovery = decode(line, fmt)
    except (FlatSignal, NoStartEdge):
        return ScanDecodeReport((), "", (), ())

    table = scan_table()
    events: list[ScanCodeEvent] = []
    flags: list[UnknownScanCode] = []
    framing = [(kind, t) for kind, t in recovery.framing_errors]
    text: list[str] = []
    shift = False

    pending_break: float | None = None
    for code, t in zip(recovery.payload, recovery.frame_times):
        if code == BREAK_PREFIX and pending_break is None:
            pending_break = t
            continue
        kind = "break" if pending_break is not None else "make"
        time = pending_break if pending_break is not None else t
        pending_break = None
        events.append(ScanCodeEvent(code, kind, time))
        key = table.get(code)
        if key is None:
            flags.append(UnknownScanCode(code, time))
            continue
        if key == "shift":
            shift = kind == "make"
        elif kind == "make":
            if key == "space":
                text.append(" ")
            elif key == "enter":
                text.append("\n")
            elif len(key) == 1:
                text.append(key.upper() if shift else key)
    if pending_break is not None:
        framing.append(("dangling-break-prefix", pending_break))
    return ScanDecodeReport(tuple(events), "".join(text), tuple(flags), tuple(framing))


def type_events(
    text: str,
    *,
    start: float = 0.01,
    dwell: float = 0.06,
    gap: float = 0.10,
) -> list[ScanCodeEvent]:
    """Make/break event list for typing ``text``, shift included.

    A convenience for demos and round-trip tests: each character holds
    for ``dwell`` seconds with ``gap`` seconds between key-downs.
    """
    reverse = {v: k for k, v in scan_table().items() if v not in ("shift",)}
    shift_code = next(k for k, v in scan_table().items() if v == "shift")
    events: list[ScanCodeEvent] = []
    t = start
    for ch in text:
        if ch == " ":
            key = "space"
        elif ch == "\n":
            key = "enter"
        else:
            key = ch.lower()
        if key not in reverse:
            raise ValueError(f"no scan code for character {ch!r}")
        code = reverse[key]
        upper = ch.isalpha() and ch.isupper()
        if upper:
            events.append(ScanCodeEvent(shift_code, "make", t))
            t += 0.2 * dwell
        events.append(ScanCodeEvent(code, "make", t))
        events.append(ScanCodeEvent(code, "break", t + dwell))
        if upper:
            events.append(ScanCodeEvent(shift_code, "break", t + dwell + 0.2 * dwell))
        t += gap
    return events
