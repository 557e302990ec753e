import pytest

from ledleak import Config, ConfigError, defaults, load_config


class TestDefaults:
    def test_bundled_sections_present(self):
        cfg = defaults()
        for section in ("channel", "led", "recovery", "covert"):
            assert section in cfg.sections()

    def test_ambient_presets_bundled(self):
        cfg = defaults()
        for name in ("dark_room", "night_office", "fluorescent_office", "daylight_office"):
            assert f"ambient.{name}" in cfg.sections()

    def test_paper_anchored_values_live_in_config(self):
        # [PAPER] the named hardware constants are config entries, not literals
        cfg = defaults()
        assert cfg.number("channel", "responsivity_a_per_w") == 0.45
        assert cfg.number("channel", "aperture_diameter_m") == 0.100
        assert cfg.number("channel", "amp_gain_v_per_a") == 1.0e4
        assert cfg.number("led", "wavelength_nm") == 650
        assert cfg.text("led", "polarity") == "lit_on_space"


class TestAccessors:
    def test_number_text_flag(self, tmp_path):
        path = tmp_path / "user.cfg"
        path.write_text("[a]\nx = 2.5\nname = hi\nenabled = true\n")
        cfg = load_config(str(path))
        assert cfg.number("a", "x") == 2.5
        assert cfg.text("a", "name") == "hi"
        assert cfg.flag("a", "enabled") is True

    def test_fallbacks(self):
        cfg = defaults()
        assert cfg.number("channel", "no_such_key", fallback=7.0) == 7.0
        assert cfg.text("channel", "no_such_key", fallback="d") == "d"
        assert cfg.flag("channel", "no_such_key", fallback=False) is False

    def test_missing_key_raises(self):
        with pytest.raises(ConfigError):
            defaults().number("channel", "no_such_key")

    def test_bad_number_raises(self, tmp_path):
        path = tmp_path / "user.cfg"
        path.write_text("[a]\nx = not_a_number\n")
        with pytest.raises(ConfigError):
            load_config(str(path)).number("a", "x")

    def test_pairs_parsing(self):
        cfg = defaults()
        pairs = cfg.pairs("ambient.fluorescent_office", "harmonics")
        assert pairs == ((2.0, 1.0e-8), (3.0, 5.0e-9))

    def test_empty_pairs(self):
        assert defaults().pairs("ambient.dark_room", "harmonics") == ()


class TestLoadConfig:
    def test_overlay_overrides_subset(self, tmp_path):
        path = tmp_path / "user.cfg"
        path.write_text("[channel]\namp_gain_v_per_a = 1.0e7\n")
        cfg = load_config(str(path))
        assert cfg.number("channel", "amp_gain_v_per_a") == 1.0e7
        # untouched keys keep their bundled value
        assert cfg.number("channel", "responsivity_a_per_w") == 0.45

    def test_missing_file_raises(self):
        with pytest.raises(ConfigError):
            load_config("/no/such/file.cfg")

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[a]\nx = 1\nthis line has no equals sign\n")
        with pytest.raises(ConfigError) as err:
            load_config(str(path))
        assert "line" in str(err.value).lower() or "3" in str(err.value)
