"""Checks comparing synthesized notes with their models and with recordings."""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np

from src.analysis.envelope import upper_envelope
from src.analysis.spectral import detect_partial_peaks, magnitude_spectrum, next_power_of_two
from src.config import A0_FREQUENCY, get_harmonic_tolerance, get_hearing_threshold
from src.models import (
    AudioBuffer,
    BandDeviation,
    EnvelopeCurve,
    ModulationReport,
    SpectralVector,
    VerificationReport,
)

log = logging.getLogger(__name__)


def _transform(values: np.ndarray, dt: float, n_fft: int) -> tuple[np.ndarray, np.ndarray]:
    spectrum = np.fft.fft(values, n=n_fft) * dt
    omega = 2 * np.pi * np.fft.fftfreq(n_fft, d=dt)
    return omega, spectrum


def verify_modulation_bound(
    synth: AudioBuffer,
    r1_series: np.ndarray,
    spectral: SpectralVector,
    gain: float = 1.0,
    phases: Optional[np.ndarray] = None,
) -> ModulationReport:
    """Per harmonic band k, max |X(omega) - F(r_k)(omega - omega_k) / 2| against 7/127.

    X is the transform of the synthesized signal (undoing ``gain``) and r_k the
    amplitude of partial k, both on [0, tau].
    """
    threshold = get_hearing_threshold()
    dt = 1.0 / synth.sample_rate
    samples = np.asarray(synth.samples, dtype=np.float64) / gain
    r1 = np.asarray(r1_series, dtype=np.float64)[: samples.size]
    n_fft = next_power_of_two(2 * samples.size)
    omega, x_hat = _transform(samples, dt, n_fft)

    warning = None
    nu1 = spectral.nu[1]
    if nu1 < A0_FREQUENCY:
        warning = f"fundamental {nu1:.2f} Hz is below {A0_FREQUENCY} Hz; the bound is not guaranteed"
        log.warning("⚠️ %s", warning)

    theta = np.zeros(len(spectral.omega)) if phases is None else np.asarray(phases)
    t = np.arange(r1.size) * dt
    w1 = spectral.omega[1]
    bands: List[BandDeviation] = []
    for k in range(1, spectral.n + 1):
        low, high = (2 * k - 1) * w1 / 2, (2 * k + 1) * w1 / 2
        in_band = (omega > low) & (omega < high)
        shifted = r1 * spectral.ratios[k] * np.exp(1j * (spectral.omega[k] * t + theta[k]))
        _, r_hat = _transform(shifted, dt, n_fft)
        deviation = float(np.max(np.abs(x_hat[in_band] - 0.5 * r_hat[in_band])))
        bands.append(
            BandDeviation(
                k=k,
                low_hz=low / (2 * np.pi),
                high_hz=high / (2 * np.pi),
                deviation=deviation,
                passed=deviation < threshold,
            )
        )
    passed = all(band.passed for band in bands)
    log.info("modulation bound: %s", "✅ all bands pass" if passed else "❌ band failure")
    return ModulationReport(bands=bands, threshold=threshold, passed=passed, warning=warning)


def partial_ratio_report(buffer: AudioBuffer, n: int) -> tuple[List[float], float]:
    """(1, d_2/d_1, ..., d_n/d_1) and nu_1 of a buffer."""
    peaks = detect_partial_peaks(magnitude_spectrum(buffer, window="hann"), n=n)
    first = peaks[0].amplitude
    return [p.amplitude / first for p in peaks], peaks[0].frequency


def envelope_max_error(
    synth: AudioBuffer, gamma: EnvelopeCurve, np_samples: Optional[int] = None, gain: float = 1.0
) -> float:
    """max |upper envelope of the synthesized signal - gamma| between their knot ranges."""
    rescaled = AudioBuffer(samples=np.asarray(synth.samples) / gain, sample_rate=synth.sample_rate)
    synth_env = upper_envelope(rescaled, np_samples)
    lo = max(synth_env.knot_times[0], gamma.knot_times[0])
    hi = min(synth_env.knot_times[-1], gamma.knot_times[-1])
    grid = np.linspace(lo, hi, max(int((hi - lo) * 2000), 2))
    return float(np.max(np.abs(synth_env(grid) - gamma(grid))))


def compare_notes(original: AudioBuffer, synthesized: AudioBuffer, n: int) -> VerificationReport:
    ratios_a, nu_a = partial_ratio_report(original, n)
    ratios_b, nu_b = partial_ratio_report(synthesized, n)
    warning = None
    if abs(nu_b - nu_a) > get_harmonic_tolerance() * nu_a:
        warning = f"fundamentals differ: {nu_a:.2f} Hz vs {nu_b:.2f} Hz"
        log.warning("⚠️ %s", warning)
    return VerificationReport(
        ratios_original=ratios_a,
        ratios_synthesized=ratios_b,
        deltas=[b - a for a, b in zip(ratios_a, ratios_b)],
        fundamental_original=nu_a,
        fundamental_synthesized=nu_b,
        warning=warning,
    )
