"""Configuration management for tonebif."""

import logging
import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
env_path = Path(__file__).parent.parent / ".env"
load_dotenv(env_path)

log = logging.getLogger(__name__)

HEARING_THRESHOLD = 7 / 127
A0_FREQUENCY = 27.5


def get_hearing_threshold() -> float:
    """Get the normalized hearing threshold (MIDI velocity 7 of 127)."""
    return HEARING_THRESHOLD


def _get_int(name: str, default: int, low: int, high: int) -> int:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except (ValueError, TypeError):
        log.warning("⚠️ Invalid %s value %r, using default %d", name, raw, default)
        return default
    if value < low or value > high:
        log.warning(
            "⚠️ %s=%d outside [%d, %d], using default %d", name, value, low, high, default
        )
        return default
    return value


def _get_float(
    name: str,
    default: float,
    low: float,
    high: float,
    low_inclusive: bool = False,
    high_inclusive: bool = True,
) -> float:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        value = float(raw)
    except (ValueError, TypeError):
        log.warning("⚠️ Invalid %s value %r, using default %g", name, raw, default)
        return default
    above = value >= low if low_inclusive else value > low
    below = value <= high if high_inclusive else value < high
    if not (above and below):
        log.warning("⚠️ %s=%g out of range, using default %g", name, value, default)
        return default
    return value


def get_partial_count() -> int:
    """Get the number of harmonic partials n to analyze."""
    return _get_int("TONEBIF_PARTIALS", 6, 1, 32)


def get_epsilon() -> float:
    """Get the offset applied to the first sustain steady state."""
    return _get_float("TONEBIF_EPSILON", 0.05, 0.0, 0.05)


def get_fit_tolerance() -> float:
    """Get the maximum allowed |rho - gamma| on every fitted subinterval."""
    return _get_float("TONEBIF_FIT_TOLERANCE", 0.05, 0.0, 1.0, high_inclusive=False)


def get_sustain_slope_ratio() -> float:
    """Get the slope ratio (relative to the attack peak) below which gamma is flat."""
    return _get_float(
        "TONEBIF_SUSTAIN_SLOPE_RATIO", 0.10, 0.0, 1.0, high_inclusive=False
    )


def get_slope_window() -> float:
    """Get the one-sided finite-difference window (seconds) for envelope slopes."""
    return _get_float("TONEBIF_SLOPE_WINDOW", 0.005, 0.0, 0.1)


def get_min_piece_duration() -> float:
    """Get the shortest envelope piece (seconds) kept as its own segment."""
    return _get_float(
        "TONEBIF_MIN_PIECE", 0.005, 0.0, 0.1, low_inclusive=True
    )


def get_max_breaking_points() -> int:
    """Get the breaking-point cap per border interval."""
    return _get_int("TONEBIF_MAX_BREAKING_POINTS", 64, 1, 1024)


def get_harmonic_tolerance() -> float:
    """Get the relative window around i*nu_1 searched for partial i."""
    return _get_float(
        "TONEBIF_HARMONIC_TOLERANCE", 0.03, 0.0, 0.5, high_inclusive=False
    )


def get_blowup_guard() -> float:
    """Get the amplitude above which integration is declared a blow-up."""
    return _get_float("TONEBIF_BLOWUP_GUARD", 1e6, 0.0, float("inf"))


def get_default_sample_rate() -> int:
    """Get the sample rate used when synthesizing from a model alone."""
    return _get_int("TONEBIF_SAMPLE_RATE", 44100, 8000, 384000)


def get_rho0_override() -> float | None:
    """Get an explicit initial scalar amplitude, if configured."""
    if os.getenv("TONEBIF_RHO0") is None:
        return None
    value = _get_float("TONEBIF_RHO0", -1.0, 0.0, 0.01)
    return None if value < 0 else value


def get_mu0_override() -> float | None:
    """Get an explicit delay-segment mu, if configured."""
    if os.getenv("TONEBIF_MU0") is None:
        return None
    value = _get_float("TONEBIF_MU0", 1.0, float("-inf"), 0.0, high_inclusive=False)
    return None if value >= 0 else value


def get_seed() -> int | None:
    """Get the reserved random seed (no randomness is currently used)."""
    raw = os.getenv("TONEBIF_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except (ValueError, TypeError):
        log.warning("⚠️ Invalid TONEBIF_SEED value %r, ignoring", raw)
        return None


def get_log_level() -> str:
    """Get the logging level name."""
    level = os.getenv("TONEBIF_LOG_LEVEL", "INFO").upper()
    if level not in logging.getLevelNamesMapping():
        log.warning("⚠️ Unknown TONEBIF_LOG_LEVEL %r, using INFO", level)
        return "INFO"
    return level
