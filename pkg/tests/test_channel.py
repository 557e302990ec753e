import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ledleak import (
    AmbientModel,
    ChannelModel,
    ConfigError,
    OpticalWaveform,
    SampleRateTooLow,
    amp_bandwidth,
    ambient_preset,
    ambient_preset_names,
    ambient_waveform,
    channel_from_config,
    propagate,
)


class TestAmpBandwidth:
    def test_anchor_points(self):
        # [PAPER] 45 kHz at 1e4 V/A, 10 kHz at 1e7 V/A
        assert amp_bandwidth(1.0e4) == pytest.approx(45.0e3, rel=1e-12)
        assert amp_bandwidth(1.0e7) == pytest.approx(10.0e3, rel=1e-12)

    def test_clamped_outside_working_range(self):
        assert amp_bandwidth(10.0) == amp_bandwidth(1.0e3)
        assert amp_bandwidth(1.0e12) == amp_bandwidth(1.0e8)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            amp_bandwidth(0.0)
        with pytest.raises(ValueError):
            amp_bandwidth(-1.0)

    @given(st.floats(min_value=1.0e3, max_value=1.0e8))
    def test_monotone_nonincreasing(self, gain):
        assert amp_bandwidth(gain * 1.5) <= amp_bandwidth(gain) + 1e-9

    def test_loglog_midpoint(self):
        # [DERIVED] straight line in log-log space: the geometric mean of
        # the anchor gains maps to the geometric mean of the bandwidths
        mid_gain = math.sqrt(1.0e4 * 1.0e7)
        expect = math.sqrt(45.0e3 * 10.0e3)
        assert amp_bandwidth(mid_gain) == pytest.approx(expect, rel=1e-12)


class TestChannelModel:
    def test_solid_angle(self):
        # [DERIVED] pi * (0.05 m)^2 / (5 m)^2
        ch = ChannelModel(distance_m=5.0, aperture_diameter_m=0.100)
        assert ch.solid_angle_sr == pytest.approx(math.pi * 0.0025 / 25.0, rel=1e-12)

    def test_inverse_square_collection(self):
        ch = ChannelModel(distance_m=7.0)
        assert ch.at_distance(14.0).collection_factor / ch.collection_factor == pytest.approx(
            0.25, rel=1e-12
        )

    def test_at_distance_preserves_rest(self):
        ch = ChannelModel(distance_m=5.0, amp_gain_v_per_a=3.3e5)
        far = ch.at_distance(38.0)
        assert far.distance_m == 38.0
        assert far.amp_gain_v_per_a == 3.3e5
        assert far.ambient == ch.ambient

    def test_validation(self):
        with pytest.raises(ValueError):
            ChannelModel(distance_m=0.0)
        with pytest.raises(ValueError):
            ChannelModel(aperture_diameter_m=-0.1)
        with pytest.raises(ValueError):
            ChannelModel(filter_transmission=0.0)
        with pytest.raises(ValueError):
            ChannelModel(filter_transmission=1.2)


class TestAmbientPresets:
    def test_bundled_names(self):
        names = set(ambient_preset_names())
        assert names == {"dark_room", "night_office", "fluorescent_office", "daylight_office"}

    def test_dark_room_is_dark(self):
        assert ambient_preset("dark_room").is_dark

    def test_fluorescent_components(self):
        amb = ambient_preset("fluorescent_office")
        assert not amb.is_dark
        freqs = [f for f, _ in amb.components()]
        assert freqs[0] == 120.0
        assert 240.0 in freqs and 360.0 in freqs
        assert 17000.0 in freqs

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown ambient preset"):
            ambient_preset("disco")


class TestAmbientWaveform:
    def test_dc_only_is_constant(self):
        amb = AmbientModel(name="flat", dc_w=3.0e-6)
        wave = ambient_waveform(amb, 1e-3, 1e6)
        assert np.all(wave.samples == 3.0e-6)

    def test_seed_determinism(self):
        amb = ambient_preset("fluorescent_office")
        a = ambient_waveform(amb, 5e-3, 1e6, seed=7)
        b = ambient_waveform(amb, 5e-3, 1e6, seed=7)
        c = ambient_waveform(amb, 5e-3, 1e6, seed=8)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_mean_tracks_dc(self):
        amb = ambient_preset("fluorescent_office")
        # integer number of mains cycles so the sinusoids average out
        wave = ambient_waveform(amb, 0.5, 1e6, seed=0)
        assert np.mean(wave.samples) == pytest.approx(amb.dc_w, rel=5e-3)


def constant_source(watts_per_sr, duration=2e-3, fs=1e6):
    n = int(round(duration * fs))
    return OpticalWaveform(fs, np.full(n, watts_per_sr))


class TestPropagate:
    def test_needs_nyquist_margin(self, dark5m):
        src = constant_source(1e-3, fs=5e4)  # bandwidth at 1e4 gain is 45 kHz
        with pytest.raises(SampleRateTooLow):
            propagate(src, dark5m)

    def test_settled_plateau_gain(self, dark5m):
        # steady source: output volts = W/sr * collection * responsivity * gain
        src = constant_source(1e-3)
        out = propagate(src, dark5m, noise=False)
        expect = 1e-3 * dark5m.collection_factor * 0.45 * 1.0e4
        assert out.samples[-1] == pytest.approx(expect, rel=1e-3)

    def test_doubling_distance_quarters_amplitude(self, dark5m):
        src = constant_source(1e-3)
        near = propagate(src, dark5m, noise=False).samples[-1]
        far = propagate(src, dark5m.at_distance(10.0), noise=False).samples[-1]
        assert far / near == pytest.approx(0.25, rel=1e-3)

    def test_noise_seed_determinism(self, dark5m):
        src = constant_source(1e-3)
        a = propagate(src, dark5m, seed=3)
        b = propagate(src, dark5m, seed=3)
        c = propagate(src, dark5m, seed=4)
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_noise_off_is_noise_free(self, dark5m):
        src = constant_source(1e-3)
        a = propagate(src, dark5m, seed=3, noise=False)
        b = propagate(src, dark5m, seed=4, noise=False)
        assert np.array_equal(a.samples, b.samples)

    def test_ambient_adds_background(self):
        lit = channel_from_config(distance_m=5.0, ambient_name="fluorescent_office")
        dark = channel_from_config(distance_m=5.0, ambient_name="dark_room")
        src = constant_source(0.0)
        with_bg = propagate(src, lit, seed=0, noise=False)
        without = propagate(src, dark, seed=0, noise=False)
        assert np.mean(with_bg.samples) > 10.0 * max(np.abs(without.samples).max(), 1e-15)

    def test_clipping(self, dark5m):
        from dataclasses import replace

        hot = replace(dark5m, clip_volts=1e-4)
        out = propagate(constant_source(1.0), hot, noise=False)
        assert out.samples.max() <= 1e-4 + 1e-18

    def test_bandwidth_smooths_short_pulses(self):
        # a 10 us flash is ~3 time constants at 45 kHz but well under one
        # at 10 kHz, so the narrow amplifier never reaches the plateau
        fs = 1e6
        samples = np.zeros(200)
        samples[100:110] = 1e-3
        src = OpticalWaveform(fs, samples)
        wide = channel_from_config(distance_m=5.0, gain=1.0e4)
        narrow = channel_from_config(distance_m=5.0, gain=1.0e7)
        v_wide = propagate(src, wide, noise=False).samples
        v_narrow = propagate(src, narrow, noise=False).samples
        scale = 1.0e7 / 1.0e4
        assert v_narrow.max() < 0.7 * scale * v_wide.max()


class TestChannelFromConfig:
    def test_defaults(self):
        ch = channel_from_config()
        assert ch.aperture_diameter_m == 0.100
        assert ch.responsivity_a_per_w == 0.45
        assert ch.amp_gain_v_per_a == 1.0e4
        assert ch.ambient.name == "dark_room"

    def test_gain_override(self):
        ch = channel_from_config(gain=2.5e6)
        assert ch.amp_gain_v_per_a == 2.5e6
        assert ch.bandwidth_hz == amp_bandwidth(2.5e6)
