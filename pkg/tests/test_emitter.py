import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ledleak import (
    FrameFormat,
    LedModel,
    Level,
    LineWaveform,
    SampleRateTooLow,
    StretcherConfig,
    conservative_stretcher,
    drive,
    encode,
    residual_timing_capacity,
    stretch,
    stretcher_for_format,
)


def fast_led(peak=5e-3):
    return LedModel(rise_time_10_90=2e-7, fall_time_10_90=2e-7, peak_intensity=peak)


class TestLedModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            LedModel(rise_time_10_90=0, fall_time_10_90=1e-7, peak_intensity=1e-3)
        with pytest.raises(ValueError):
            LedModel(rise_time_10_90=1e-7, fall_time_10_90=1e-7, peak_intensity=0)
        with pytest.raises(ValueError):
            LedModel(
                rise_time_10_90=1e-7,
                fall_time_10_90=1e-7,
                peak_intensity=1e-3,
                polarity="lit_always",
            )


class TestDrive:
    def test_ten_ninety_rise_time(self):
        # [DERIVED] the 10-90 transit of the exponential equals the
        # configured rise time
        rise = 5e-6
        led = LedModel(rise_time_10_90=rise, fall_time_10_90=rise, peak_intensity=1.0)
        line = LineWaveform(Level.MARK, ((1e-4, Level.SPACE),), 5e-4)
        fs = 2e8
        wave = drive(line, led, fs)
        t = np.arange(len(wave.samples)) / fs
        t10 = t[np.searchsorted(wave.samples, 0.1)]
        t90 = t[np.searchsorted(wave.samples, 0.9)]
        assert (t90 - t10) == pytest.approx(rise, rel=0.01)

    def test_space_lights_the_led(self, fmt9600):
        led = fast_led()
        line = encode(b"\x00", fmt9600, lead_in=1e-3)
        wave = drive(line, led, 16 * 9600.0)
        assert wave.samples.max() == pytest.approx(led.peak_intensity, rel=1e-3)
        assert wave.samples[0] == pytest.approx(0.0, abs=1e-12)

    def test_mark_polarity_inverts(self, fmt9600):
        led = LedModel(
            rise_time_10_90=2e-7,
            fall_time_10_90=2e-7,
            peak_intensity=1e-3,
            polarity="lit_on_mark",
        )
        line = encode(b"", fmt9600)  # idle mark
        idle = LineWaveform(line.initial_level, line.transitions, 1e-3)
        wave = drive(idle, led, 1e5)
        assert wave.samples.min() == pytest.approx(1e-3, rel=1e-6)

    def test_sample_rate_guard(self, fmt9600):
        # fewer than 10 samples across a unit interval must refuse
        line = encode(b"\x55", fmt9600)
        with pytest.raises(SampleRateTooLow):
            drive(line, fast_led(), 8 * 9600.0)

    def test_dark_line_is_dark(self):
        line = LineWaveform(Level.MARK, (), 1e-3)
        wave = drive(line, fast_led(), 1e5)
        assert np.all(wave.samples == 0.0)


class TestStretch:
    def test_minimum_hold_enforced(self, fmt9600):
        ui = fmt9600.unit_interval
        line = encode(b"\x55\x4d\x00\xff", fmt9600)
        out = stretch(line, StretcherConfig(min_on=1.5 * ui))
        assert all(b - a >= 1.5 * ui - 1e-12 for a, b in out.space_intervals())

    def test_onsets_preserved(self, fmt9600):
        ui = fmt9600.unit_interval
        line = encode(b"\x29\x4d", fmt9600)
        out = stretch(line, StretcherConfig(min_on=1.5 * ui))
        original_onsets = {a for a, _ in line.space_intervals()}
        for a, _ in out.space_intervals():
            assert a in original_onsets

    def test_never_shortens(self, fmt9600):
        ui = fmt9600.unit_interval
        line = encode(b"\x00\x55", fmt9600)
        out = stretch(line, StretcherConfig(min_on=0.25 * ui))
        total_in = sum(b - a for a, b in line.space_intervals())
        total_out = sum(b - a for a, b in out.space_intervals())
        assert total_out >= total_in - 1e-12

    def test_idle_passes_through(self):
        idle = LineWaveform(Level.MARK, (), 0.01)
        assert stretch(idle, StretcherConfig(min_on=1e-3)) is idle

    def test_trailing_release_grows_duration(self):
        line = LineWaveform(Level.MARK, ((0.009, Level.SPACE), (0.0095, Level.MARK)), 0.01)
        out = stretch(line, StretcherConfig(min_on=5e-3))
        assert out.duration >= 0.009 + 5e-3

    def test_min_off_merges_gaps(self, fmt9600):
        ui = fmt9600.unit_interval
        # 0x55 alternates lit and dark every unit; a min_off of 1.5 units
        # swallows each dark sliver into one long blob
        line = encode(b"\x55", fmt9600)
        out = stretch(line, StretcherConfig(min_on=ui, min_off=1.5 * ui))
        assert len(out.space_intervals()) == 1

    def test_idempotent(self, fmt9600):
        ui = fmt9600.unit_interval
        cfg = StretcherConfig(min_on=1.5 * ui)
        once = stretch(encode(b"\x55\x12", fmt9600), cfg)
        twice = stretch(once, cfg)
        assert twice.transitions == once.transitions

    @given(payload=st.binary(min_size=1, max_size=16), multiple=st.sampled_from([0.5, 1.5, 2.0, 3.0]))
    def test_hold_property(self, payload, multiple):
        fmt = FrameFormat(bit_rate=9600.0)
        cfg = stretcher_for_format(fmt, multiple=multiple)
        out = stretch(encode(payload, fmt), cfg)
        for a, b in out.space_intervals():
            assert b - a >= cfg.min_on - 1e-12


class TestStretcherHelpers:
    def test_stretcher_for_format(self, fmt9600):
        cfg = stretcher_for_format(fmt9600, multiple=2.0)
        assert cfg.min_on == pytest.approx(2.0 * fmt9600.unit_interval)
        assert cfg.min_off is None

    def test_conservative_holds_a_character(self, fmt9600):
        cfg = conservative_stretcher(fmt9600)
        assert cfg.min_on == pytest.approx(fmt9600.character_interval)

    def test_residual_capacity_readings(self, fmt9600):
        # [DERIVED] with a character-interval hold, one observable pulse
        # per character: 960 per second at 9600 b/s 8N1; the published
        # expression evaluates to the 10-unit ratio
        cap = residual_timing_capacity(fmt9600)
        assert cap.literal_ratio == pytest.approx(10.0)
        assert cap.per_character_rate == pytest.approx(960.0)


class TestStretchDefeatsSampling:
    def test_long_hold_corrupts_decisions(self, fmt9600):
        ui = fmt9600.unit_interval
        line = encode(b"\x55\x55", fmt9600)
        out = stretch(line, stretcher_for_format(fmt9600, multiple=1.5))
        n = 20
        decisions = (np.arange(n) + 0.5) * ui
        assert np.any(line.space_at(decisions) != out.space_at(decisions))

    def test_short_hold_is_transparent(self, fmt9600):
        ui = fmt9600.unit_interval
        line = encode(b"\x55\x4d\x81", fmt9600)
        out = stretch(line, stretcher_for_format(fmt9600, multiple=0.5))
        n = 30
        decisions = (np.arange(n) + 0.5) * ui
        assert np.array_equal(line.space_at(decisions), out.space_at(decisions))
