"""Tests for environment-driven settings."""

import pytest

from src import config


class TestDefaults:
    def test_defaults(self):
        assert config.get_hearing_threshold() == pytest.approx(7 / 127)
        assert config.get_partial_count() == 6
        assert config.get_epsilon() == 0.05
        assert config.get_fit_tolerance() == 0.05
        assert config.get_slope_window() == 0.005
        assert config.get_max_breaking_points() == 64
        assert config.get_default_sample_rate() == 44100
        assert config.get_rho0_override() is None
        assert config.get_mu0_override() is None
        assert config.get_seed() is None
        assert config.get_log_level() == "INFO"


class TestOverrides:
    @pytest.mark.parametrize(
        "name,raw,getter,expected",
        [
            ("TONEBIF_EPSILON", "0.03", config.get_epsilon, 0.03),
            ("TONEBIF_PARTIALS", "12", config.get_partial_count, 12),
            ("TONEBIF_MIN_PIECE", "0", config.get_min_piece_duration, 0.0),
            ("TONEBIF_RHO0", "0.005", config.get_rho0_override, 0.005),
            ("TONEBIF_MU0", "-0.2", config.get_mu0_override, -0.2),
            ("TONEBIF_SEED", "7", config.get_seed, 7),
            ("TONEBIF_LOG_LEVEL", "debug", config.get_log_level, "DEBUG"),
        ],
    )
    def test_valid_values(self, monkeypatch, name, raw, getter, expected):
        monkeypatch.setenv(name, raw)
        assert getter() == expected

    @pytest.mark.parametrize(
        "name,raw,getter,expected",
        [
            ("TONEBIF_EPSILON", "0.06", config.get_epsilon, 0.05),
            ("TONEBIF_EPSILON", "0", config.get_epsilon, 0.05),
            ("TONEBIF_PARTIALS", "40", config.get_partial_count, 6),
            ("TONEBIF_PARTIALS", "six", config.get_partial_count, 6),
            ("TONEBIF_SAMPLE_RATE", "4000", config.get_default_sample_rate, 44100),
            ("TONEBIF_RHO0", "0.5", config.get_rho0_override, None),
            ("TONEBIF_MU0", "0.3", config.get_mu0_override, None),
            ("TONEBIF_SEED", "x", config.get_seed, None),
            ("TONEBIF_LOG_LEVEL", "chatty", config.get_log_level, "INFO"),
        ],
    )
    def test_invalid_values_fall_back(self, monkeypatch, name, raw, getter, expected):
        monkeypatch.setenv(name, raw)
        assert getter() == expected
