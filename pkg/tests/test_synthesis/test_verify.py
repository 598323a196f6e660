"""Tests for the synthesis checks."""

import numpy as np
import pytest

from src.analysis.envelope import upper_envelope
from src.models import AudioBuffer, SpectralVector
from src.synthesis.additive import render_model, synthesize
from src.synthesis.verify import (
    compare_notes,
    envelope_max_error,
    partial_ratio_report,
    verify_modulation_bound,
)

FS = 8000


class TestModulationBound:
    """Harmonic bands of a synthesized note against the shifted amplitudes."""

    def test_rendered_violin_passes(self, violin_model):
        buffer, gain, series = render_model(violin_model, FS)
        r1 = np.asarray(series.rho) / violin_model.spectral.rho_sum

        report = verify_modulation_bound(buffer, r1, violin_model.spectral, gain)

        assert report.passed
        assert [band.k for band in report.bands] == [1, 2, 3, 4, 5, 6]
        assert report.bands[0].low_hz == pytest.approx(277.6 / 2)
        assert report.threshold == pytest.approx(7 / 127)
        assert report.warning is None

    def test_wrong_amplitude_fails(self):
        spectral = SpectralVector(d=[0.0, 1.0], omega=[0.0, 2 * np.pi * 300])
        r1 = np.full(FS, 0.5)
        buffer, gain = synthesize(r1, spectral, FS)

        report = verify_modulation_bound(buffer, 2 * r1, spectral, gain)

        assert not report.passed
        assert report.bands[0].deviation > 0.1

    def test_low_fundamental_warns(self):
        spectral = SpectralVector(d=[0.0, 1.0], omega=[0.0, 2 * np.pi * 20])
        r1 = np.full(FS, 0.5)
        buffer, gain = synthesize(r1, spectral, FS)

        report = verify_modulation_bound(buffer, r1, spectral, gain)

        assert "27.5 Hz" in report.warning


class TestPartialRatios:
    def test_ratio_report(self, tone_factory):
        tone = tone_factory([(220, 0.8), (440, 0.4), (660, 0.2)], sample_rate=8192)

        ratios, fundamental = partial_ratio_report(tone, 3)

        assert ratios == pytest.approx([1.0, 0.5, 0.25], abs=0.01)
        assert fundamental == pytest.approx(220.0, abs=0.5)

    def test_same_note(self, tone_factory):
        tone = tone_factory([(220, 0.8), (440, 0.4)], sample_rate=8192)

        report = compare_notes(tone, tone, 2)

        assert report.warning is None
        assert report.deltas == pytest.approx([0.0, 0.0])

    def test_detuned_note_warns(self, tone_factory):
        original = tone_factory([(220, 0.8), (440, 0.4)], sample_rate=8192)
        detuned = tone_factory([(230, 0.8), (460, 0.2)], sample_rate=8192)

        report = compare_notes(original, detuned, 2)

        assert report.warning is not None
        assert "220" in report.warning
        assert report.deltas[1] == pytest.approx(-0.25, abs=0.01)


class TestEnvelopeError:
    @staticmethod
    def swell(t):
        return 0.5 + 0.3 * np.sin(2 * np.pi * 2 * t)

    def test_identical_envelope(self, tone_factory):
        tone = tone_factory([(200, 1.0)], sample_rate=FS, envelope=self.swell)
        gamma = upper_envelope(tone, np_samples=40)

        assert envelope_max_error(tone, gamma, np_samples=40) < 1e-9

    def test_gain_is_undone(self, tone_factory):
        tone = tone_factory([(200, 1.0)], sample_rate=FS, envelope=self.swell)
        gamma = upper_envelope(tone, np_samples=40)
        quieter = AudioBuffer(samples=0.5 * tone.samples, sample_rate=FS)

        assert envelope_max_error(quieter, gamma, np_samples=40, gain=0.5) < 1e-9
        assert envelope_max_error(quieter, gamma, np_samples=40) > 0.2
