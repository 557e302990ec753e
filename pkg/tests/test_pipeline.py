import numpy as np
import pytest

from ledleak import (
    FrameFormat,
    LinkResult,
    channel_from_config,
    led_from_config,
    pick_sample_rate,
    simulate_link,
    stretcher_for_format,
)


class TestPickSampleRate:
    def test_bit_clock_floor(self):
        # 16 samples per unit at fast rates
        assert pick_sample_rate(FrameFormat(19200.0)) == 16 * 19200.0

    def test_absolute_floor_at_slow_rates(self):
        assert pick_sample_rate(FrameFormat(300.0)) == 1.0e5

    def test_amplifier_band_wins_when_wider(self):
        ch = channel_from_config(gain=1.0e3)  # widest band
        fs = pick_sample_rate(FrameFormat(300.0), ch)
        assert fs == pytest.approx(2.5 * ch.bandwidth_hz)
        assert fs > 1.0e5


class TestLedFromConfig:
    def test_bundled_values(self):
        led = led_from_config()
        assert led.polarity == "lit_on_space"
        assert led.wavelength_nm == 650.0
        assert led.rise_time_10_90 > 0


class TestSimulateLink:
    def test_noiseless_dark_room_is_error_free(self, fmt9600, dark5m):
        res = simulate_link(b"attack at dawn", fmt9600, dark5m, noise=False)
        assert res.ber == 0.0
        assert res.recovered_payload == b"attack at dawn"
        assert res.failure is None
        assert res.recovery.clean

    def test_seed_determinism(self, fmt9600, dark5m):
        a = simulate_link(b"seeded", fmt9600, dark5m, seed=5)
        b = simulate_link(b"seeded", fmt9600, dark5m, seed=5)
        c = simulate_link(b"seeded", fmt9600, dark5m, seed=6)
        assert np.array_equal(a.detector.samples, b.detector.samples)
        assert a.ber == b.ber
        assert not np.array_equal(a.detector.samples, c.detector.samples)

    def test_stretcher_reshapes_transmitted_line_only(self, fmt9600, dark5m):
        cfg = stretcher_for_format(fmt9600, multiple=1.5)
        # stretching 0x55 leaves half-unit dark gaps; raise the sample
        # rate so the shortest gap still spans 10 samples
        res = simulate_link(
            b"\x55\x55", fmt9600, dark5m, noise=False, stretcher=cfg, sample_rate=3.2e5
        )
        assert res.line.transitions != res.transmitted_line.transitions
        min_lit = min(b - a for a, b in res.transmitted_line.space_intervals())
        assert min_lit >= cfg.min_on - 1e-12

    def test_suppress_auto_tracks_ambient(self, fmt9600):
        dark = channel_from_config(distance_m=5.0, ambient_name="dark_room")
        lit = channel_from_config(distance_m=5.0, ambient_name="fluorescent_office")
        res_dark = simulate_link(b"zz", fmt9600, dark, noise=False)
        res_lit = simulate_link(b"zz", fmt9600, lit, noise=False)
        assert res_dark.processed is res_dark.detector
        assert res_lit.processed is not res_lit.detector

    def test_flat_capture_reports_failure(self, fmt9600):
        far = channel_from_config(distance_m=5.0, ambient_name="dark_room").at_distance(
            5000.0
        )
        res = simulate_link(b"gone", fmt9600, far, seed=0)
        assert res.ber == 1.0
        assert res.failure is not None and res.failure.startswith("flat")
        assert res.recovered_payload == b""

    def test_expected_times(self, fmt9600, dark5m):
        res = simulate_link(
            b"abc", fmt9600, dark5m, noise=False, lead_in=2e-3, inter_char_idle=1e-3
        )
        period = fmt9600.character_interval + 1e-3
        want = 2e-3 + period * np.arange(3)
        assert np.allclose(res.expected_times, want)
        assert res.ber == 0.0

    def test_correlation_k_high_on_clean_link(self, fmt9600, dark5m):
        # the 45 kHz amplifier rounds the edges, so k settles near 0.99
        # rather than 1 even without noise
        res = simulate_link(b"\x55\x4d\x22", fmt9600, dark5m, noise=False)
        assert res.correlation_k() > 0.95

    def test_sample_rate_override(self, fmt9600, dark5m):
        res = simulate_link(b"q", fmt9600, dark5m, noise=False, sample_rate=3.2e5)
        assert res.sample_rate == 3.2e5
        assert res.detector.sample_rate == 3.2e5

    def test_result_is_fully_populated(self, fmt9600, dark5m):
        res = simulate_link(b"full", fmt9600, dark5m)
        assert isinstance(res, LinkResult)
        assert res.optical.sample_rate == res.sample_rate
        assert len(res.detector.samples) == len(res.optical.samples)
        assert res.fmt is fmt9600
        assert res.seed == 0
