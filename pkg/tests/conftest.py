"""Shared test fixtures."""

import numpy as np
import pytest

from src.data.reference_notes import PIANO, VIOLIN, reference_model
from src.models import AudioBuffer, EnvelopeCurve
from src.synthesis.additive import simulate_model


@pytest.fixture(autouse=True)
def clean_tonebif_environment(monkeypatch):
    """Keep TONEBIF_* settings from the developer's shell out of the tests."""
    import os

    for name in list(os.environ):
        if name.startswith("TONEBIF_"):
            monkeypatch.delenv(name, raising=False)
    yield


def make_tone(partials, sample_rate=8192, duration=1.0, envelope=None):
    """Sum of cosines given as (frequency, amplitude) pairs, optionally enveloped."""
    t = np.arange(int(round(sample_rate * duration))) / sample_rate
    signal = np.zeros_like(t)
    for frequency, amplitude in partials:
        signal += amplitude * np.cos(2 * np.pi * frequency * t)
    if envelope is not None:
        signal *= envelope(t)
    return AudioBuffer(samples=signal, sample_rate=sample_rate)


@pytest.fixture
def tone_factory():
    return make_tone


def piano_shape(t):
    """Piano-like envelope: silent, exponential attack, short decay, flat sustain, exponential release."""
    t = np.asarray(t, dtype=np.float64)
    attack = 0.72 * np.exp(250.0 * (t - 0.112))
    linear = np.interp(t, [0.112, 0.16, 0.293], [0.72, 0.519, 0.5166])
    release = 0.5166 * np.exp(-(t - 0.293) / 0.1)
    return np.where(t < 0.084, 0.0, np.where(t <= 0.112, attack, np.where(t <= 0.293, linear, release)))


@pytest.fixture
def piano_envelope():
    """Envelope curve with knots every millisecond on [0, 3.5] s."""
    times = np.round(np.arange(0, 3501) * 1e-3, 6)
    return EnvelopeCurve(
        knot_times=times.tolist(), knot_values=piano_shape(times).tolist(), t_end=3.5
    )


@pytest.fixture(scope="session")
def violin_series():
    """Scalar rho of the reference violin model on an 8 kHz grid."""
    return simulate_model(reference_model(VIOLIN), 8000)


@pytest.fixture
def violin_envelope(violin_series):
    """The reference violin rho resampled to one knot per millisecond."""
    times = np.asarray(violin_series.times)[::8]
    values = np.asarray(violin_series.rho)[::8]
    return EnvelopeCurve(knot_times=times.tolist(), knot_values=values.tolist(), t_end=2.5)


@pytest.fixture
def piano_model():
    return reference_model(PIANO)


@pytest.fixture
def violin_model():
    return reference_model(VIOLIN)
