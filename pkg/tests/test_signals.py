import numpy as np
import pytest

from ledleak import (
    DetectorWaveform,
    FrameFormat,
    Level,
    LineWaveform,
    OpticalWaveform,
    encode,
    line_to_samples,
    load_waveform,
    save_waveform,
    sum_waveforms,
)


class TestWaveformTypes:
    def test_rejects_bad_sample_rate(self):
        with pytest.raises(ValueError):
            OpticalWaveform(0.0, np.zeros(4))
        with pytest.raises(ValueError):
            DetectorWaveform(-1.0, np.zeros(4))

    def test_duration(self):
        wave = OpticalWaveform(100.0, np.zeros(50))
        assert wave.duration == pytest.approx(0.5)


class TestLineToSamples:
    def test_left_continuous_at_edges(self):
        line = LineWaveform(Level.MARK, ((0.01, Level.SPACE), (0.02, Level.MARK)), 0.03)
        fs = 1000.0
        samples = line_to_samples(line, fs)
        # sample index 10 falls exactly on the onset edge; the edge is
        # not yet taken, so it still reads dark
        assert samples[10] == 0.0
        assert samples[11] == 1.0
        assert samples[20] == 1.0
        assert samples[21] == 0.0

    def test_amplitude_and_polarity(self):
        line = LineWaveform(Level.SPACE, (), 0.01)
        assert np.all(line_to_samples(line, 1000.0, amplitude=3.5) == 3.5)
        assert np.all(line_to_samples(line, 1000.0, lit_level=Level.MARK) == 0.0)

    def test_n_samples_pads_at_final_level(self):
        line = LineWaveform(Level.MARK, ((0.001, Level.SPACE),), 0.002)
        samples = line_to_samples(line, 1000.0, n_samples=10)
        assert len(samples) == 10
        assert samples[-1] == 1.0

    def test_n_samples_truncates(self):
        line = LineWaveform(Level.MARK, (), 1.0)
        assert len(line_to_samples(line, 1000.0, n_samples=17)) == 17


class TestSumWaveforms:
    def test_pointwise_sum_with_padding(self):
        a = OpticalWaveform(10.0, np.ones(5))
        b = OpticalWaveform(10.0, np.ones(3) * 2)
        total = sum_waveforms([a, b])
        assert np.array_equal(total.samples, [3, 3, 3, 1, 1])

    def test_rejects_rate_mismatch(self):
        a = OpticalWaveform(10.0, np.ones(5))
        b = OpticalWaveform(20.0, np.ones(5))
        with pytest.raises(ValueError):
            sum_waveforms([a, b])

    def test_staircase_from_overlapping_sources(self, fmt9600):
        # two lit lines overlapping -> level 2 plateau
        fs = 16 * 9600.0
        l1 = encode(b"\x00", fmt9600)
        l2 = encode(b"\x00", fmt9600, lead_in=2 * fmt9600.unit_interval)
        summed = sum_waveforms(
            [
                OpticalWaveform(fs, line_to_samples(l1, fs)),
                OpticalWaveform(fs, line_to_samples(l2, fs)),
            ]
        )
        assert summed.samples.max() == 2.0
        assert set(np.unique(summed.samples)) <= {0.0, 1.0, 2.0}


class TestSaveLoad:
    @pytest.mark.parametrize("file_format", ["binary", "text"])
    def test_round_trip(self, tmp_path, file_format):
        wave = DetectorWaveform(2.5e5, np.linspace(-1e-3, 2e-3, 64))
        path = str(tmp_path / "capture.dat")
        save_waveform(path, wave, file_format=file_format, units="V", seed=7)
        back = load_waveform(path)
        assert isinstance(back, DetectorWaveform)
        assert back.sample_rate == wave.sample_rate
        np.testing.assert_array_equal(back.samples, wave.samples)

    def test_kind_survives(self, tmp_path):
        wave = OpticalWaveform(1e5, np.arange(8.0))
        path = str(tmp_path / "opt.dat")
        save_waveform(path, wave)
        assert isinstance(load_waveform(path), OpticalWaveform)

    def test_unknown_format_rejected(self, tmp_path):
        wave = OpticalWaveform(1e5, np.arange(8.0))
        with pytest.raises(ValueError):
            save_waveform(str(tmp_path / "x.dat"), wave, file_format="pickle")
