"""Free-space optical path, photodetector, and transimpedance stage.

The receive chain is intensity in watts per steradian at the source,
geometric collection through a circular aperture, an optical bandpass
filter modelled as a flat transmission factor, photodiode conversion at a
fixed responsivity, and a transimpedance amplifier whose bandwidth shrinks
as gain grows.  Amplifier output is a voltage; all noise is injected after
the bandwidth limit so the noise floor itself is not rolled off twice.

Everything here is linear apart from the optional clip ceiling, so
superposition holds exactly: propagating a sum of optical waveforms equals
the sum of the individual propagations minus the ambient-only response
(noise disabled).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy.signal import lfilter

from .configio import Config, defaults
from .errors import ConfigError, SampleRateTooLow
from .signals import DetectorWaveform, OpticalWaveform

ELEMENTARY_CHARGE = 1.602176634e-19

# gain/bandwidth trade of the transimpedance stage: measured anchor points,
# log-log interpolated between them, clamped outside
_GAIN_ANCHORS = (1.0e4, 1.0e7)
_BW_ANCHORS = (45.0e3, 10.0e3)
_GAIN_FLOOR = 1.0e3
_GAIN_CEIL = 1.0e8


def amp_bandwidth(gain: float) -> float:
    """Amplifier -3 dB bandwidth in Hz for a transimpedance gain in V/A.

    Exactly 45 kHz at a gain of 1e4 and 10 kHz at 1e7; between the anchors
    the bandwidth follows a straight line in log-log coordinates, and the
    gain is clamped to [1e3, 1e8] before evaluation.
    """
    if gain <= 0.0:
        raise ValueError("gain must be positive")
    g = min(max(gain, _GAIN_FLOOR), _GAIN_CEIL)
    lg0, lg1 = math.log10(_GAIN_ANCHORS[0]), math.log10(_GAIN_ANCHORS[1])
    lb0, lb1 = math.log10(_BW_ANCHORS[0]), math.log10(_BW_ANCHORS[1])
    frac = (math.log10(g) - lg0) / (lg1 - lg0)
    return 10.0 ** (lb0 + frac * (lb1 - lb0))


@dataclass(frozen=True)
class AmbientModel:
    """Background light reaching the detector, in watts.

    ``dc_w`` is the steady component.  ``fundamental_hz`` with
    ``fundamental_w`` describes mains flicker; ``harmonics`` holds
    (multiple, watts) pairs on top of the fundamental, and ``hf`` holds
    (frequency_hz, watts) pairs for electronic-ballast components well
    above the mains ladder.  Component phases are drawn per seed.
    """

    name: str = "dark_room"
    dc_w: float = 0.0
    fundamental_hz: float = 120.0
    fundamental_w: float = 0.0
    harmonics: tuple[tuple[float, float], ...] = ()
    hf: tuple[tuple[float, float], ...] = ()

    def components(self) -> tuple[tuple[float, float], ...]:
        """All sinusoidal (frequency_hz, amplitude_w) terms, zeros dropped."""
        terms = []
        if self.fundamental_w > 0.0:
            terms.append((self.fundamental_hz, self.fundamental_w))
        for mult, amp in self.harmonics:
            if amp > 0.0:
                terms.append((mult * self.fundamental_hz, amp))
        for freq, amp in self.hf:
            if amp > 0.0:
                terms.append((freq, amp))
        return tuple(terms)

    @property
    def has_ac(self) -> bool:
        return bool(self.components())

    @property
    def is_dark(self) -> bool:
        return self.dc_w == 0.0 and not self.has_ac


@lru_cache(maxsize=None)
def _preset_cached(name: str) -> AmbientModel:
    return _preset_from(defaults(), name)


def _preset_from(cfg: Config, name: str) -> AmbientModel:
    section = f"ambient.{name}"
    if section not in cfg.sections():
        known = ", ".join(ambient_preset_names(cfg))
        raise ConfigError(f"unknown ambient preset {name!r} (have: {known})")
    return AmbientModel(
        name=name,
        dc_w=cfg.number(section, "dc_w"),
        fundamental_hz=cfg.number(section, "mains_fundamental_hz"),
        fundamental_w=cfg.number(section, "mains_amplitude_w", fallback=0.0),
        harmonics=cfg.pairs(section, "harmonics"),
        hf=cfg.pairs(section, "hf"),
    )


def ambient_preset(name: str, cfg: Config | None = None) -> AmbientModel:
    """Named lighting preset, from ``cfg`` or the bundled defaults."""
    if cfg is None:
        return _preset_cached(name)
    return _preset_from(cfg, name)


def ambient_preset_names(cfg: Config | None = None) -> tuple[str, ...]:
    cfg = cfg or defaults()
    prefix = "ambient."
    return tuple(
        s[len(prefix):] for s in cfg.sections() if s.startswith(prefix)
    )


@dataclass(frozen=True)
class ChannelModel:
    """Geometry plus receiver electronics for one eavesdropping setup."""

    distance_m: float = 5.0
    aperture_diameter_m: float = 0.100
    filter_transmission: float = 0.90
    responsivity_a_per_w: float = 0.45
    detector_area_mm2: float = 1.0
    amp_gain_v_per_a: float = 1.0e4
    thermal_noise_density: float = 2.0e-8
    include_shot_noise: bool = True
    clip_volts: float | None = None
    ambient: AmbientModel = field(default_factory=AmbientModel)

    def __post_init__(self) -> None:
        if self.distance_m <= 0.0:
            raise ValueError("distance must be positive")
        if self.aperture_diameter_m <= 0.0:
            raise ValueError("aperture diameter must be positive")
        if not 0.0 < self.filter_transmission <= 1.0:
            raise ValueError("filter transmission must lie in (0, 1]")

    @property
    def solid_angle_sr(self) -> float:
        """Collection solid angle of the aperture seen from the source."""
        radius = 0.5 * self.aperture_diameter_m
        return math.pi * radius * radius / (self.distance_m**2)

    @property
    def collection_factor(self) -> float:
        """Watts at the detector per watt/sr at the source."""
        return self.solid_angle_sr * self.filter_transmission

    @property
    def bandwidth_hz(self) -> float:
        return amp_bandwidth(self.amp_gain_v_per_a)

    def at_distance(self, distance_m: float) -> "ChannelModel":
        from dataclasses import replace

        return replace(self, distance_m=distance_m)


def channel_from_config(
    cfg: Config | None = None,
    *,
    distance_m: float = 5.0,
    ambient_name: str = "dark_room",
    gain: float | None = None,
) -> ChannelModel:
    cfg = cfg or defaults()
    return ChannelModel(
        distance_m=distance_m,
        aperture_diameter_m=cfg.number("channel", "aperture_diameter_m"),
        filter_transmission=cfg.number("channel", "filter_transmission"),
        responsivity_a_per_w=cfg.number("channel", "responsivity_a_per_w"),
        detector_area_mm2=cfg.number("channel", "detector_area_mm2"),
        amp_gain_v_per_a=(
            gain if gain is not None else cfg.number("channel", "amp_gain_v_per_a")
        ),
        thermal_noise_density=cfg.number("channel", "thermal_noise_density_v_rthz"),
        include_shot_noise=cfg.flag("channel", "include_shot_noise"),
        ambient=ambient_preset(ambient_name, cfg),
    )


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def ambient_waveform(
    model: AmbientModel,
    duration: float,
    sample_rate: float,
    seed=0,
) -> OpticalWaveform:
    """Sampled background light in watts with per-seed component phases."""
    n = int(round(duration * sample_rate))
    samples = np.full(n, model.dc_w, dtype=np.float64)
    components = model.components()
    if components:
        rng = np.random.default_rng(_as_seedseq(seed))
        t = np.arange(n, dtype=np.float64) / sample_rate
        for freq, amp in components:
            phase = rng.uniform(0.0, 2.0 * math.pi)
            samples += amp * np.sin(2.0 * math.pi * freq * t + phase)
    return OpticalWaveform(sample_rate=sample_rate, samples=samples)


def _single_pole_lowpass(x: np.ndarray, cutoff_hz: float, fs: float) -> np.ndarray:
    # first-order RC response, initial state settled at x[0]
    rc = 1.0 / (2.0 * math.pi * cutoff_hz)
    dt = 1.0 / fs
    alpha = dt / (rc + dt)
    zi = np.array([(1.0 - alpha) * x[0]]) if len(x) else np.zeros(1)
    y, _ = lfilter([alpha], [1.0, alpha - 1.0], x, zi=zi)
    return y


def propagate(
    optical: OpticalWaveform,
    model: ChannelModel,
    seed=0,
    *,
    noise: bool = True,
) -> DetectorWaveform:
    """Amplifier output voltage for source intensity ``optical`` (W/sr).

    Geometric collection, ambient light, photodiode conversion, and the
    gain-dependent single-pole bandwidth limit are always applied.  With
    ``noise`` enabled, shot noise from the mean photocurrent plus the
    thermal floor is added after the bandwidth limit; the two sub-streams
    (ambient phases, noise draws) come from independent children of the
    seed so results are reproducible run to run.
    """
    fs = optical.sample_rate
    bw = model.bandwidth_hz
    if fs < 2.0 * bw:
        raise SampleRateTooLow(
            f"sample rate {fs:g} Hz cannot represent the {bw:g} Hz "
            f"amplifier band; need at least {2.0 * bw:g} Hz"
        )

    ambient_seq, noise_seq = _as_seedseq(seed).spawn(2)

    power_w = optical.samples * model.collection_factor
    if not model.ambient.is_dark:
        background = ambient_waveform(
            model.ambient, optical.duration, fs, seed=ambient_seq
        )
        power_w = power_w + background.samples[: len(power_w)]

    current_a = power_w * model.responsivity_a_per_w
    volts = _single_pole_lowpass(current_a * model.amp_gain_v_per_a, bw, fs)

    if noise:
        sigma = _noise_sigma(model, current_a, bw)
        if sigma > 0.0:
            rng = np.random.default_rng(noise_seq)
            volts = volts + rng.normal(0.0, sigma, size=len(volts))

    if model.clip_volts is not None:
        volts = np.clip(volts, -model.clip_volts, model.clip_volts)

    return DetectorWaveform(sample_rate=fs, samples=volts)


def _noise_sigma(model: ChannelModel, current_a: np.ndarray, bw: float) -> float:
    thermal_var = (model.thermal_noise_density**2) * bw
    shot_var = 0.0
    if model.include_shot_noise and len(current_a):
        mean_current = float(np.mean(np.abs(current_a)))
        shot_var = (
            (model.amp_gain_v_per_a**2)
            * 2.0
            * ELEMENTARY_CHARGE
            * mean_current
            * bw
        )
    return math.sqrt(thermal_var + shot_var)
