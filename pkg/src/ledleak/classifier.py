"""Indicator emission classes and the synthetic device survey.

Three behaviors cover every front-panel indicator we model.  Class I
lights report state: power good, link up, carrier present.  Their
intensity barely changes while the device runs.  Class II lights are
modulated by activity (disk busy, packets moving, buffer filling), but
each flash spans many bit times, so only traffic volume and timing
leak.  Class III lights track the data line itself: point a
photodetector at one and the byte stream comes back out.

classify() assigns the label mechanically from a captured waveform: no
measurable modulation means Class I, a recovery pipeline that decodes
the known test payload cleanly means Class III, and anything between is
Class II.  survey() runs a roster of device fixtures through that same
measurement.  The bundled roster reflects the equipment mix of a small
machine room; each fixture records how its indicator is wired (tap
type), any pulse throttling the driver applies, and which side of a
link encryptor the indicator sits on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources

import numpy as np

from .channel import ChannelModel, propagate
from .configio import Config, defaults
from .emitter import LedModel, StretcherConfig, drive, stretch
from .errors import ConfigError, FlatSignal, NoStartEdge
from .lineproto import FrameFormat, Level, LineWaveform, encode
from .receiver import binarize, bit_error_rate, correlation, decode, suppress_ambient
from .signals import DetectorWaveform, OpticalWaveform

_TAPS = ("data_line", "activity_envelope", "static_state")
_SIDES = ("red", "black", "n/a")

_FIXTURE_DIR = "fixtures"

# synthesis shape shared by survey and the countermeasure tests
_DATA_BYTES = 180
_BURST_BYTES = 8
_BURSTS = 6
_ENVELOPE_BURST_BYTES = 4
_ENVELOPE_MIN_PULSE = 0.005
_STATIC_DURATION = 0.15
_STATIC_RATE = 1.0e5


class EmissionClass(Enum):
    """How much an indicator gives away, from presence up to content."""

    I = "I"
    II = "II"
    III = "III"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ClassLabel:
    """Verdict for one capture, with the measurements behind it.

    ``ber`` and ``k`` are filled only when a recovery was attempted;
    ``min_pulse_observed`` only when the capture earned Class II, where
    the shortest flash bounds what an eavesdropper could still time.
    """

    emission_class: EmissionClass
    modulation_depth: float
    min_pulse_observed: float | None = None
    ber: float | None = None
    k: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.modulation_depth <= 1.0 + 1e-12:
            raise ValueError(f"modulation depth {self.modulation_depth} outside [0, 1]")
        if self.emission_class is EmissionClass.III and self.ber is None:
            raise ValueError("a Class III label must carry the error rate that earned it")


@dataclass(frozen=True)
class DeviceFixture:
    """One surveyed indicator: how it is wired and how it is throttled.

    ``tap`` names what modulates the light.  ``min_pulse`` is the
    shortest flash the device's driver will emit (absent when the LED
    follows the line directly).  ``side`` marks where the indicator sits
    relative to any link encryption: ``red`` is the plaintext side.
    ``rated_rate`` is the serial rate the device was exercised at.
    ``group`` is a roster section heading, reporting only.
    """

    name: str
    tap: str
    rated_rate: float = 9600.0
    side: str = "n/a"
    min_pulse: float | None = None
    group: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("fixture needs a name")
        if self.tap not in _TAPS:
            raise ValueError(f"tap must be one of {_TAPS}, got {self.tap!r}")
        if self.side not in _SIDES:
            raise ValueError(f"side must be one of {_SIDES}, got {self.side!r}")
        if self.rated_rate <= 0:
            raise ValueError("rated_rate must be positive")
        if self.min_pulse is not None and self.min_pulse <= 0:
            raise ValueError("min_pulse must be positive when present")


def modulation_depth(optical: OpticalWaveform) -> float:
    """Fractional swing of the captured intensity, robust to brief spikes.

    (p95 - p5) / p95 over the samples; identically zero for a constant
    (or dark) capture.
    """
    if len(optical.samples) == 0:
        return 0.0
    p5, p95 = np.percentile(optical.samples, [5.0, 95.0])
    if p95 <= 0.0:
        return 0.0
    return float(max(0.0, p95 - p5) / p95)


def _shortest_flash(optical: OpticalWaveform) -> float | None:
    """Duration of the shortest lit interval, from a thresholded copy."""
    try:
        line = binarize(DetectorWaveform(optical.sample_rate, optical.samples))
    except FlatSignal:
        return None
    lit = [b - a for a, b in line.space_intervals()]
    return min(lit) if lit else None


def _content_correlation(
    processed: DetectorWaveform,
    truth: bytes,
    fmt: FrameFormat,
    first_frame: float,
) -> float | None:
    """Pearson k between the capture and the truth bytes re-laid on the line.

    The reference assumes back-to-back characters from the first
    recovered frame onward, so it is only meaningful for continuous
    transmissions; bursty or throttled captures score low, which is the
    point of the measurement.
    """
    from .signals import line_to_samples

    reference = encode(truth, fmt, lead_in=first_frame)
    ref = line_to_samples(reference, processed.sample_rate, n_samples=len(processed.samples))
    if float(np.ptp(ref)) == 0.0:
        return None
    return correlation(processed, ref, max_shift_s=fmt.character_interval).k


def classify(
    optical: OpticalWaveform,
    truth: bytes,
    fmt: FrameFormat,
    *,
    channel: ChannelModel | None = None,
    seed=0,
    cfg: Config | None = None,
) -> ClassLabel:
    """Label one captured emission against the known test payload.

    Without a channel the light is read directly (a bench capture at the
    front panel).  With one, the capture is propagated through it first,
    noise and ambient included, so the label reflects what an
    eavesdropper at that range would get; background suppression runs
    whenever the ambient model flickers.  The class thresholds come from
    the [recovery] section of the configuration.
    """
    cfg = cfg or defaults()
    depth_floor = cfg.number("recovery", "modulation_depth_class_i")
    ber_ceiling = cfg.number("recovery", "ber_class_iii_threshold")

    depth = modulation_depth(optical)
    if depth < depth_floor:
        return ClassLabel(EmissionClass.I, depth)

    min_pulse = _shortest_flash(optical)

    if channel is not None:
        detector = propagate(optical, channel, seed=seed)
        processed = suppress_ambient(detector) if channel.ambient.has_ac else detector
    else:
        processed = DetectorWaveform(optical.sample_rate, optical.samples)

    ber: float | None = None
    k: float | None = None
    if truth:
        try:
            line = binarize(processed)
            recovery = decode(line, fmt)
            ber = bit_error_rate(truth, recovery)
            if recovery.frame_times:
                k = _content_correlation(processed, truth, fmt, recovery.frame_times[0])
        except (FlatSignal, NoStartEdge):
            ber = 1.0
        if ber <= ber_ceiling:
            return ClassLabel(EmissionClass.III, depth, ber=ber, k=k)
    return ClassLabel(EmissionClass.II, depth, min_pulse_observed=min_pulse, ber=ber, k=k)


# --- fixture waveform synthesis --------------------------------------------


def _concat_bursts(bursts: list[LineWaveform], gap: float, lead_in: float) -> LineWaveform:
    """Join mark-idle-delimited character bursts with `gap` seconds between."""
    transitions: list[tuple[float, Level]] = []
    t = lead_in
    for burst in bursts:
        transitions.extend((t + tt, lvl) for tt, lvl in burst.transitions)
        t += burst.duration + gap
    # the final gap stays as trailing idle
    return LineWaveform(Level.MARK, tuple(transitions), t)


def _burst_gap(fmt: FrameFormat, min_pulse: float) -> float:
    """Inter-burst idle: past the throttle hold, snapped to whole characters."""
    want = max(3.0 * min_pulse, 10.0 * fmt.character_interval)
    chars = math.ceil(want / fmt.character_interval)
    return chars * fmt.character_interval


def _split_payload(payload: bytes, per_burst: int) -> list[bytes]:
    return [payload[i : i + per_burst] for i in range(0, len(payload), per_burst)]


@dataclass(frozen=True)
class TapCapture:
    """Synthesized emission for one fixture: light, truth, and framing."""

    optical: OpticalWaveform
    truth: bytes
    fmt: FrameFormat
    line: LineWaveform


def fixture_capture(
    fixture: DeviceFixture,
    *,
    seed=0,
    led: LedModel | None = None,
    stretcher: StretcherConfig | None = None,
    sample_rate: float | None = None,
    channel: ChannelModel | None = None,
) -> TapCapture:
    """Forward-simulate the light one fixture's indicator would emit.

    A data_line tap encodes a seeded random payload at the rated rate; a
    device-side throttle (``min_pulse``) breaks the payload into bursts
    so stretched flashes stay separated the way real traffic does.  An
    activity_envelope tap is the same burst machinery with the throttle
    always on: only activity blobs survive.  A static_state tap is
    constant light.  ``stretcher`` layers an external countermeasure on
    top of whatever the device itself does.  ``channel`` only informs
    the sample-rate choice; propagation happens in classify().
    """
    from .pipeline import led_from_config, pick_sample_rate

    led = led or led_from_config()
    rng = np.random.default_rng(seed)

    if fixture.tap == "static_state":
        fs = sample_rate or _STATIC_RATE
        if channel is not None:
            fs = max(fs, 2.5 * channel.bandwidth_hz)
        n = int(round(_STATIC_DURATION * fs))
        samples = np.full(n, led.peak_intensity)
        fmt = FrameFormat(bit_rate=fixture.rated_rate)
        line = LineWaveform(Level.MARK, (), _STATIC_DURATION)
        return TapCapture(OpticalWaveform(fs, samples), b"", fmt, line)

    fmt = FrameFormat(bit_rate=fixture.rated_rate)
    fs = sample_rate or pick_sample_rate(fmt, channel)
    ui = fmt.unit_interval
    lead_in = 4.0 * fmt.character_interval

    throttle = fixture.min_pulse
    if fixture.tap == "activity_envelope" and throttle is None:
        throttle = _ENVELOPE_MIN_PULSE

    if throttle is None:
        payload = bytes(rng.integers(0, 256, _DATA_BYTES, dtype=np.uint8))
        line = encode(payload, fmt, lead_in=lead_in)
    else:
        per_burst = _BURST_BYTES if fixture.tap == "data_line" else _ENVELOPE_BURST_BYTES
        payload = bytes(rng.integers(0, 256, (_BURSTS - 1) * per_burst, dtype=np.uint8))
        # a lone trailing character flashes exactly one hold time: bursts
        # retrigger the hold, so only an isolated blink reveals it
        payload += b"\xff"
        bursts = [encode(b, fmt) for b in _split_payload(payload[:-1], per_burst)]
        bursts.append(encode(payload[-1:], fmt))
        line = _concat_bursts(bursts, _burst_gap(fmt, throttle), lead_in)
        # the hold time is a whole number of unit intervals in every
        # bundled fixture, so stretched edges stay on the bit lattice and
        # the sub-bit dark slivers a merge can leave get folded away
        line = stretch(line, StretcherConfig(min_on=throttle, min_off=0.5 * ui))

    if stretcher is not None:
        line = stretch(line, stretcher)
    return TapCapture(drive(line, led, fs), payload, fmt, line)


# --- survey ------------------------------------------------------------------


@dataclass(frozen=True)
class FixtureOutcome:
    """One surveyed fixture and the label its emission earned."""

    fixture: DeviceFixture
    label: ClassLabel

    @property
    def plaintext_exposed(self) -> bool:
        """Content leaks from the unencrypted side of a link."""
        return (
            self.fixture.side == "red"
            and self.label.emission_class is EmissionClass.III
        )


@dataclass(frozen=True)
class SurveyReport:
    """Classification outcomes for a fixture roster under one scenario."""

    outcomes: tuple[FixtureOutcome, ...]

    @property
    def counts(self) -> dict[EmissionClass, int]:
        out = {cls: 0 for cls in EmissionClass}
        for outcome in self.outcomes:
            out[outcome.label.emission_class] += 1
        return out

    @property
    def class_iii_fraction(self) -> float:
        if not self.outcomes:
            return 0.0
        return self.counts[EmissionClass.III] / len(self.outcomes)

    def render(self) -> str:
        """Three-class bullet table, grouped the way the roster is."""
        width = max(len(o.fixture.name) for o in self.outcomes)
        width = max(width, len("LED Indicator"))
        lines = [
            f"{'LED Indicator':<{width}} |  I  | II  | III",
            f"{'-' * width}-+-----+-----+-----",
        ]
        group = None
        for outcome in self.outcomes:
            if outcome.fixture.group != group:
                group = outcome.fixture.group
                if group:
                    lines.append(f"-- {group} --")
            cells = {cls: "   " for cls in EmissionClass}
            cells[outcome.label.emission_class] = " * "
            exposed = "  (plaintext side)" if outcome.plaintext_exposed else ""
            lines.append(
                f"{outcome.fixture.name:<{width}} | {cells[EmissionClass.I]} "
                f"| {cells[EmissionClass.II]} | {cells[EmissionClass.III]}{exposed}"
            )
        counts = self.counts
        lines.append(
            f"{len(self.outcomes)} devices: {counts[EmissionClass.I]} Class I, "
            f"{counts[EmissionClass.II]} Class II, {counts[EmissionClass.III]} Class III "
            f"({100.0 * self.class_iii_fraction:.0f}%)"
        )
        return "\n".join(lines)


def survey(
    fixtures: list[DeviceFixture] | tuple[DeviceFixture, ...],
    scenario: ChannelModel,
    seed=0,
    *,
    cfg: Config | None = None,
) -> SurveyReport:
    """Simulate and classify every fixture as seen through ``scenario``.

    Each fixture draws its payload and its observation noise from its own
    child of ``seed``, so the outcome for a device does not depend on
    where it sits in the list (and fixtures could be evaluated in
    parallel without changing the report).
    """
    if not fixtures:
        raise ValueError("need at least one fixture to survey")
    cfg = cfg or defaults()
    children = np.random.SeedSequence(seed).spawn(len(fixtures))
    outcomes = []
    for fixture, child in zip(fixtures, children):
        synth_seed, observe_seed = child.spawn(2)
        capture = fixture_capture(fixture, seed=synth_seed, channel=scenario)
        label = classify(
            capture.optical,
            capture.truth,
            capture.fmt,
            channel=scenario,
            seed=observe_seed,
            cfg=cfg,
        )
        outcomes.append(FixtureOutcome(fixture, label))
    return SurveyReport(tuple(outcomes))


# --- fixture files -----------------------------------------------------------

_FIXTURE_KEYS = {"name", "group", "tap", "rated_rate", "side", "min_pulse"}


def read_fixture(path: str) -> DeviceFixture:
    """Parse one key=value fixture file."""
    fields: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {text!r}")
            key, _, value = text.partition("=")
            key = key.strip()
            if key not in _FIXTURE_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown fixture key {key!r}")
            fields[key] = value.strip()
    for required in ("name", "tap"):
        if required not in fields:
            raise ConfigError(f"{path}: missing required key {required!r}")
    try:
        return DeviceFixture(
            name=fields["name"],
            tap=fields["tap"],
            rated_rate=float(fields.get("rated_rate", "9600")),
            side=fields.get("side", "n/a"),
            min_pulse=float(fields["min_pulse"]) if "min_pulse" in fields else None,
            group=fields.get("group", ""),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def bundled_fixtures() -> tuple[DeviceFixture, ...]:
    """The packaged survey roster, in file order."""
    root = resources.files(__package__).joinpath("data", _FIXTURE_DIR)
    out = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".kv"):
            with resources.as_file(entry) as path:
                out.append(read_fixture(str(path)))
    if not out:
        raise ConfigError("no bundled fixture files found")
    return tuple(out)
