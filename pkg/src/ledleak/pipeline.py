"""End-to-end link simulation: bytes to light to voltage and back.

simulate_link() runs one transmit/eavesdrop/recover pass and returns every
intermediate product, so tests and the command line can inspect whichever
stage they care about without re-running the physics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelModel, propagate
from .configio import Config, defaults
from .emitter import LedModel, StretcherConfig, drive, stretch
from .errors import FlatSignal, NoStartEdge
from .lineproto import FrameFormat, LineWaveform, encode
from .receiver import (
    RecoveryResult,
    binarize,
    bit_error_rate,
    correlation,
    decode,
    suppress_ambient,
)
from .signals import DetectorWaveform, OpticalWaveform

SAMPLE_RATE_FLOOR = 1.0e5
UNITS_PER_SAMPLE_MIN = 16.0


def led_from_config(cfg: Config | None = None) -> LedModel:
    cfg = cfg or defaults()
    return LedModel(
        rise_time_10_90=cfg.number("led", "rise_time_10_90_s"),
        fall_time_10_90=cfg.number("led", "fall_time_10_90_s"),
        peak_intensity=cfg.number("led", "peak_intensity_w_sr"),
        polarity=cfg.text("led", "polarity"),
        wavelength_nm=cfg.number("led", "wavelength_nm"),
    )


def pick_sample_rate(
    fmt: FrameFormat,
    channel: ChannelModel | None = None,
    *,
    minimum: float = SAMPLE_RATE_FLOOR,
) -> float:
    """Sample rate high enough for both the bit clock and the amplifier."""
    fs = max(UNITS_PER_SAMPLE_MIN * fmt.bit_rate, minimum)
    if channel is not None:
        fs = max(fs, 2.5 * channel.bandwidth_hz)
    return fs


@dataclass(frozen=True)
class LinkResult:
    """Every stage of one simulated link, plus the recovery verdict."""

    payload: bytes
    fmt: FrameFormat
    line: LineWaveform
    transmitted_line: LineWaveform
    optical: OpticalWaveform
    detector: DetectorWaveform
    processed: DetectorWaveform
    recovered_line: LineWaveform | None
    recovery: RecoveryResult | None
    ber: float
    failure: str | None
    sample_rate: float
    seed: int
    lead_in: float = 0.0
    inter_char_idle: float = 0.0

    @property
    def recovered_payload(self) -> bytes:
        return self.recovery.payload if self.recovery else b""

    @property
    def expected_times(self) -> np.ndarray:
        """True start instant of each sent frame."""
        period = self.fmt.character_interval + self.inter_char_idle
        return self.lead_in + period * np.arange(len(self.payload))

    def correlation_k(self, max_shift_s: float | None = None) -> float:
        """Pearson k of the processed waveform against the emitted light.

        The alignment search defaults to one character interval of slack,
        enough to absorb the amplifier's group delay at any gain.
        """
        if max_shift_s is None:
            max_shift_s = self.fmt.character_interval
        return correlation(
            self.processed, self.optical.samples, max_shift_s=max_shift_s
        ).k


def simulate_link(
    payload: bytes,
    fmt: FrameFormat,
    channel: ChannelModel,
    led: LedModel | None = None,
    *,
    seed: int = 0,
    noise: bool = True,
    suppress: bool | str = "auto",
    stretcher: StretcherConfig | None = None,
    sample_rate: float | None = None,
    lead_in: float = 0.0,
    inter_char_idle: float = 0.0,
) -> LinkResult:
    """Simulate one serial transmission observed through an optical channel.

    ``suppress="auto"`` runs background suppression only when the ambient
    model has AC content; pass True or False to force either way.  A
    stretcher, if given, reshapes the line driving the LED but not the
    ground-truth line used for error accounting.  Signal too flat or
    featureless to recover yields ber 1.0 with ``failure`` set rather
    than an exception.
    """
    led = led or led_from_config()
    fs = sample_rate if sample_rate is not None else pick_sample_rate(fmt, channel)

    line = encode(payload, fmt, lead_in=lead_in, inter_char_idle=inter_char_idle)
    transmitted = stretch(line, stretcher) if stretcher is not None else line
    optical = drive(transmitted, led, fs)
    detector = propagate(optical, channel, seed=seed, noise=noise)

    if suppress == "auto":
        do_suppress = channel.ambient.has_ac
    else:
        do_suppress = bool(suppress)
    processed = suppress_ambient(detector) if do_suppress else detector

    recovered_line: LineWaveform | None = None
    recovery: RecoveryResult | None = None
    failure: str | None = None
    period = fmt.character_interval + inter_char_idle
    expected = lead_in + period * np.arange(len(payload))
    try:
        recovered_line = binarize(processed, lit_level=led.lit_level)
        recovery = decode(recovered_line, fmt)
        ber = bit_error_rate(payload, recovery, expected_times=expected)
    except FlatSignal as exc:
        failure = f"flat: {exc}"
        ber = 1.0
    except NoStartEdge as exc:
        failure = f"no-start: {exc}"
        ber = 1.0

    return LinkResult(
        payload=payload,
        fmt=fmt,
        line=line,
        transmitted_line=transmitted,
        optical=optical,
        detector=detector,
        processed=processed,
        recovered_line=recovered_line,
        recovery=recovery,
        ber=ber,
        failure=failure,
        sample_rate=fs,
        seed=seed,
        lead_in=lead_in,
        inter_char_idle=inter_char_idle,
    )
