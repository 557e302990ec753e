import numpy as np
import pytest

from ledleak import (
    CANDIDATE_RATES,
    CorrelationResult,
    DetectorWaveform,
    FlatSignal,
    FrameFormat,
    InsufficientTransitions,
    LengthMismatch,
    Level,
    LineWaveform,
    NoStartEdge,
    RecoveryResult,
    binarize,
    bit_error_rate,
    correlation,
    decode,
    encode,
    estimate_rate,
    line_to_samples,
    suppress_ambient,
)

FS = 1.0e5


def sine(freq, duration=0.2, amp=1.0, fs=FS):
    t = np.arange(int(duration * fs)) / fs
    return DetectorWaveform(fs, amp * np.sin(2 * np.pi * freq * t))


def rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


class TestSuppressAmbient:
    def test_removes_dc(self):
        wave = DetectorWaveform(FS, np.full(20000, 0.7))
        out = suppress_ambient(wave)
        assert np.abs(out.samples).max() < 1e-9

    def test_kills_mains_flicker(self):
        out = suppress_ambient(sine(120.0))
        # better than 20 dB down
        assert rms(out.samples) < 0.1 * rms(sine(120.0).samples)

    def test_passes_signal_band(self):
        out = suppress_ambient(sine(2000.0))
        # under 1 dB of loss well above the corner
        assert rms(out.samples) > 0.89 * rms(sine(2000.0).samples)

    def test_short_capture_falls_back_to_mean(self):
        wave = DetectorWaveform(FS, np.array([1.0, 2.0, 3.0]))
        out = suppress_ambient(wave)
        assert len(out.samples) == 3
        assert np.mean(out.samples) == pytest.approx(0.0, abs=1e-12)


class TestBinarize:
    def test_recovers_encoded_line(self, fmt9600, rng):
        line = encode(b"\x4d\x22", fmt9600, lead_in=1e-3)
        fs = 32 * 9600.0
        volts = line_to_samples(line, fs) * 5e-3
        volts += rng.normal(0.0, 1e-4, size=len(volts))
        got = binarize(DetectorWaveform(fs, volts))
        assert got.initial_level is Level.MARK
        want = [(t, lvl) for t, lvl in line.transitions]
        assert len(got.transitions) == len(want)
        for (tg, lg), (tw, lw) in zip(got.transitions, want):
            assert lg is lw
            assert tg == pytest.approx(tw, abs=1.5 / fs)

    def test_lit_level_flips_mapping(self):
        x = np.concatenate([np.zeros(100), np.ones(100)])
        wave = DetectorWaveform(FS, x)
        assert binarize(wave).transitions[0][1] is Level.SPACE
        assert binarize(wave, lit_level=Level.MARK).transitions[0][1] is Level.MARK

    def test_flat_raises(self):
        with pytest.raises(FlatSignal):
            binarize(DetectorWaveform(FS, np.full(1000, 0.3)))

    def test_pure_noise_raises(self, rng):
        with pytest.raises(FlatSignal):
            binarize(DetectorWaveform(FS, rng.normal(0.0, 1e-3, 5000)))

    def test_percentile_validation(self):
        wave = DetectorWaveform(FS, np.concatenate([np.zeros(50), np.ones(50)]))
        for bad in [(-1.0, 95.0), (5.0, 101.0), (95.0, 5.0), (50.0, 50.0)]:
            with pytest.raises(ValueError):
                binarize(wave, percentiles=bad)

    def test_hysteresis_rides_through_wiggle(self):
        # a dip to 0.48 stays inside the +/-0.05 band around 0.5, so the
        # state must hold and the line shows one rise and one fall only
        x = np.concatenate(
            [np.zeros(200), np.ones(200), np.full(50, 0.48), np.ones(200), np.zeros(200)]
        )
        got = binarize(DetectorWaveform(FS, x))
        assert len(got.transitions) == 2

    def test_sparse_duty_needs_wide_anchors(self):
        # 1% duty burst: default anchors see a flat line, wide ones do not
        x = np.zeros(10000)
        x[5000:5100] = 1.0
        wave = DetectorWaveform(FS, x)
        with pytest.raises(FlatSignal):
            binarize(wave)
        got = binarize(wave, percentiles=(0.5, 99.8))
        assert len(got.space_intervals()) == 1


class TestDecode:
    def test_clean_roundtrip(self, fmt9600):
        payload = bytes(range(0, 256, 7))
        line = encode(payload, fmt9600)
        got = decode(line, fmt9600)
        assert got.payload == payload
        assert got.clean
        assert len(got.frame_times) == len(payload)

    def test_truth_scoring(self, fmt9600):
        payload = b"counted against truth"
        got = decode(encode(payload, fmt9600), fmt9600, truth=payload)
        assert got.bit_errors == 0
        assert got.bits_total == 8 * len(payload)

    def test_no_truth_no_counts(self, fmt9600):
        got = decode(encode(b"x", fmt9600), fmt9600)
        assert got.bit_errors is None and got.bits_total is None

    def test_glitch_resync(self, fmt9600):
        ui = fmt9600.unit_interval
        real = encode(b"\x5a", fmt9600, lead_in=4 * ui)
        # prepend a 0.2-unit false start pulse inside the lead-in
        glitch = ((0.5 * ui, Level.SPACE), (0.7 * ui, Level.MARK))
        line = LineWaveform(Level.MARK, glitch + real.transitions, real.duration)
        got = decode(line, fmt9600)
        assert got.payload == b"\x5a"
        assert ("start", 0.5 * ui) in got.framing_errors

    def test_stop_violation_drops_byte(self, fmt9600):
        ui = fmt9600.unit_interval
        # space held straight through the stop cell
        line = LineWaveform(Level.MARK, ((0.0, Level.SPACE),), 12 * ui)
        got = decode(line, fmt9600)
        assert got.payload == b""
        assert got.framing_errors and got.framing_errors[0][0] == "stop"

    def test_parity_mismatch_keeps_byte(self):
        even = FrameFormat(9600.0, parity="even")
        odd = FrameFormat(9600.0, parity="odd")
        payload = b"\x01\x02"
        got = decode(encode(payload, even), odd)
        assert got.payload == payload
        assert [kind for kind, _ in got.framing_errors] == ["parity", "parity"]

    def test_idle_raises(self, fmt9600):
        with pytest.raises(NoStartEdge):
            decode(encode(b"", fmt9600), fmt9600)


class TestBitErrorRate:
    def test_identity(self, fmt9600):
        payload = b"abcdef"
        got = decode(encode(payload, fmt9600), fmt9600)
        assert bit_error_rate(payload, got) == 0.0

    def test_empty_sent(self):
        assert bit_error_rate(b"", b"") == 0.0
        assert bit_error_rate(b"", b"x") == 1.0

    def test_single_flip_positional(self):
        assert bit_error_rate(b"\x00\x00", b"\x01\x00") == pytest.approx(1 / 16)

    def test_missing_tail_charged(self):
        assert bit_error_rate(b"\xff\xff", b"\xff") == pytest.approx(0.5)

    def test_dropped_frame_time_alignment(self, fmt9600):
        tc = fmt9600.character_interval
        sent = b"\x11\x22\x33"
        times = np.array([0.0, tc, 2 * tc])
        # middle frame lost; the survivors carry correct bytes
        got = RecoveryResult(
            payload=b"\x11\x33",
            frame_times=(0.0, 2 * tc),
            framing_errors=(),
            fmt=fmt9600,
        )
        aligned = bit_error_rate(sent, got, expected_times=times)
        assert aligned == pytest.approx(8 / 24)
        # positional scoring smears the loss over later bytes too
        assert bit_error_rate(sent, got) > aligned

    def test_times_length_guard(self, fmt9600):
        got = decode(encode(b"ab", fmt9600), fmt9600)
        with pytest.raises(ValueError):
            bit_error_rate(b"ab", got, expected_times=np.array([0.0]))


class TestCorrelation:
    def test_self_correlation(self, fmt9600):
        line = encode(b"\x4d\x37\x55", fmt9600)
        fs = 32 * 9600.0
        meas = DetectorWaveform(fs, line_to_samples(line, fs) * 2e-3 + 1e-3)
        got = correlation(meas, line)
        assert got.k == pytest.approx(1.0, abs=1e-9)
        assert got.lag_s == 0.0
        assert got.n == len(meas.samples)

    def test_inverted_signal_anticorrelates(self, fmt9600):
        line = encode(b"\x4d\x37", fmt9600)
        fs = 32 * 9600.0
        meas = DetectorWaveform(fs, -line_to_samples(line, fs))
        got = correlation(meas, line)
        assert got.k == pytest.approx(-1.0, abs=1e-9)

    def test_lag_search(self, fmt9600):
        line = encode(b"\x4d\x37\x29", fmt9600)
        fs = 32 * 9600.0
        ref = line_to_samples(line, fs)
        shifted = np.roll(ref, 40)
        got = correlation(DetectorWaveform(fs, shifted), ref, max_shift_s=1e-3)
        assert got.lag_s == pytest.approx(40 / fs)
        assert got.k == pytest.approx(1.0, abs=1e-6)

    def test_duration_mismatch(self, fmt9600):
        line = encode(b"\x4d", fmt9600)
        fs = 32 * 9600.0
        meas = DetectorWaveform(fs, np.zeros(int(2 * fs * line.duration)))
        with pytest.raises(LengthMismatch):
            correlation(meas, line)

    def test_rate_mismatch(self):
        a = DetectorWaveform(1e5, np.arange(100.0))
        b = DetectorWaveform(2e5, np.arange(100.0))
        with pytest.raises(LengthMismatch):
            correlation(a, b)

    def test_result_validation(self):
        with pytest.raises(ValueError):
            CorrelationResult(k=1.5, lag_s=0.0, n=10)
        with pytest.raises(ValueError):
            CorrelationResult(k=0.5, lag_s=0.0, n=1)


class TestEstimateRate:
    @pytest.mark.parametrize("rate", [300.0, 2400.0, 9600.0, 19200.0])
    def test_snaps_to_ladder(self, rate):
        fmt = FrameFormat(rate)
        line = encode(b"\x55" * 6, fmt)
        assert estimate_rate(line) == rate

    def test_from_detector_capture(self, fmt9600):
        line = encode(b"\x55\xaa\x55", fmt9600, lead_in=1e-3)
        fs = 40 * 9600.0
        meas = DetectorWaveform(fs, line_to_samples(line, fs) * 3e-3)
        assert estimate_rate(meas) == 9600.0

    def test_offladder_rate_returned_raw(self):
        fmt = FrameFormat(7000.0)
        line = encode(b"\x55" * 6, fmt)
        got = estimate_rate(line)
        assert got not in CANDIDATE_RATES
        assert got == pytest.approx(7000.0, rel=0.02)

    def test_insufficient_transitions(self, fmt9600):
        with pytest.raises(InsufficientTransitions):
            estimate_rate(encode(b"\xff", fmt9600))

    def test_flat_capture(self):
        with pytest.raises(InsufficientTransitions):
            estimate_rate(DetectorWaveform(1e5, np.full(4000, 0.2)))
