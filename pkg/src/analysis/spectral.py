"""Magnitude spectra, harmonic partial peaks and the amplitude spectral vector."""

from __future__ import annotations

import logging
from typing import List, Literal, Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from src.config import A0_FREQUENCY, get_harmonic_tolerance, get_hearing_threshold
from src.errors import MissingPartialError
from src.models import AudioBuffer, PartialPeak, SpectralVector, Spectrum

log = logging.getLogger(__name__)

D0_GRID_POINTS = 4096
MAX_AUTO_PARTIALS = 32


def next_power_of_two(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


def magnitude_spectrum(
    buffer: AudioBuffer, window: Literal["rect", "hann"] = "rect"
) -> Spectrum:
    """Compute the one-sided magnitude spectrum of a buffer.

    The buffer is zero-padded to the next power of two. ``amplitudes`` holds the
    single-sided amplitude scale (a cosine of amplitude A yields A at its bin).
    """
    samples = np.asarray(buffer.samples, dtype=np.float64)
    if samples.size == 0:
        raise ValueError("cannot take the spectrum of an empty buffer")

    if window == "hann":
        w = np.hanning(samples.size)
    elif window == "rect":
        w = np.ones(samples.size)
    else:
        raise ValueError(f"unknown window {window!r}")

    n_fft = next_power_of_two(samples.size)
    spectrum = np.fft.rfft(samples * w, n=n_fft)
    magnitudes = np.abs(spectrum)

    scale = float(np.sum(w))
    amplitudes = 2.0 * magnitudes / scale
    amplitudes[0] = magnitudes[0] / scale
    if n_fft % 2 == 0 and n_fft > 1:
        amplitudes[-1] = magnitudes[-1] / scale

    return Spectrum(
        bin_freqs=np.fft.rfftfreq(n_fft, d=1.0 / buffer.sample_rate),
        magnitudes=magnitudes,
        amplitudes=amplitudes,
        sample_rate=buffer.sample_rate,
        n_fft=n_fft,
        window=window,
    )


def _parabolic(values: np.ndarray, k: int) -> tuple[float, float]:
    """Quadratic interpolation of a sampled maximum: (fractional bin offset, height)."""
    if k <= 0 or k >= values.size - 1:
        return 0.0, float(values[k])
    left, centre, right = values[k - 1], values[k], values[k + 1]
    denom = left - 2.0 * centre + right
    if denom == 0:
        return 0.0, float(centre)
    p = 0.5 * (left - right) / denom
    return float(p), float(centre - 0.25 * (left - right) * p)


def _local_maxima(amplitudes: np.ndarray) -> np.ndarray:
    peaks, _ = find_peaks(amplitudes)
    return peaks


def detect_partial_peaks(
    spectrum: Spectrum,
    n: Optional[int] = None,
    fundamental_hint: Optional[float] = None,
) -> List[PartialPeak]:
    """Locate the leading harmonic partials.

    With an explicit ``n`` exactly n partials are returned. With ``n=None`` every
    harmonic up to the Nyquist limit is examined and each partial whose ratio to
    the fundamental falls below the hearing threshold is dropped on its own, so a
    quiet partial does not hide louder ones above it.
    """
    amplitudes = spectrum.amplitudes
    freqs = spectrum.bin_freqs
    resolution = spectrum.resolution
    nyquist = spectrum.sample_rate / 2.0
    tolerance = get_harmonic_tolerance()

    auto = n is None
    search_n = 2 if auto else n
    if search_n < 1:
        raise ValueError("n must be >= 1")

    maxima = _local_maxima(amplitudes)
    if maxima.size == 0:
        raise MissingPartialError(1, fundamental_hint or A0_FREQUENCY)

    if fundamental_hint is not None:
        k1 = int(maxima[np.argmin(np.abs(freqs[maxima] - fundamental_hint))])
    else:
        in_range = maxima[(freqs[maxima] >= A0_FREQUENCY) & (freqs[maxima] <= nyquist / search_n)]
        if in_range.size == 0:
            raise MissingPartialError(1, A0_FREQUENCY)
        k1 = int(in_range[np.argmax(amplitudes[in_range])])

    offset, height = _parabolic(amplitudes, k1)
    nu1 = (k1 + offset) * resolution
    peaks = [PartialPeak(index=1, frequency=nu1, amplitude=height)]

    limit = n if not auto else min(MAX_AUTO_PARTIALS, int(nyquist / nu1))
    threshold = get_hearing_threshold()
    for i in range(2, limit + 1):
        target = i * nu1
        window = maxima[np.abs(freqs[maxima] - target) <= tolerance * target]
        if window.size == 0:
            if auto:
                log.debug("no maximum near partial %d, skipped", i)
                continue
            raise MissingPartialError(i, target)
        k = int(window[np.argmax(amplitudes[window])])
        offset, height = _parabolic(amplitudes, k)
        if auto and height / peaks[0].amplitude < threshold:
            log.debug("partial %d below hearing threshold, dropped", i)
            continue
        peaks.append(PartialPeak(index=i, frequency=(k + offset) * resolution, amplitude=height))

    log.info("✅ %d partials detected, nu_1 = %.2f Hz", len(peaks), nu1)
    return peaks


def partial_sum(t: np.ndarray | float, frequencies, amplitudes) -> np.ndarray:
    """Evaluate sum_i d_i cos(2 pi nu_i t)."""
    t = np.asarray(t, dtype=np.float64)
    nu = np.asarray(frequencies, dtype=np.float64)
    d = np.asarray(amplitudes, dtype=np.float64)
    return np.cos(2 * np.pi * np.multiply.outer(t, nu)) @ d


def compute_d0(peaks: List[PartialPeak]) -> float:
    """DC amplitude that keeps the partial sum above minus the amplitude total.

    d_0 = -(sum d_i + min_t sum d_i cos(2 pi nu_i t)) / 2 with t over one
    fundamental period; the minimum is located on a dense grid and refined.
    """
    if not peaks:
        raise ValueError("compute_d0 needs at least one peak")
    nu = [p.frequency for p in peaks]
    d = [p.amplitude for p in peaks]
    period = 1.0 / nu[0]

    points = max(D0_GRID_POINTS, 64 * int(np.ceil(max(nu) / nu[0])))
    grid = np.linspace(0.0, period, points + 1)
    values = partial_sum(grid, nu, d)
    k = int(np.argmin(values))
    best = float(values[k])

    step = grid[1] - grid[0]
    lo, hi = max(0.0, grid[k] - step), min(period, grid[k] + step)
    refined = minimize_scalar(
        lambda t: float(partial_sum(t, nu, d)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-9},
    )
    if refined.success:
        best = min(best, float(refined.fun))

    return -0.5 * (float(sum(d)) + best)


def build_spectral_vector(peaks: List[PartialPeak], d0: float) -> SpectralVector:
    ordered = sorted(peaks, key=lambda p: p.index)
    return SpectralVector(
        d=[float(d0)] + [p.amplitude for p in ordered],
        omega=[0.0] + [2 * np.pi * p.frequency for p in ordered],
    )


def analyze_buffer(
    buffer: AudioBuffer,
    n: Optional[int] = None,
    fundamental_hint: Optional[float] = None,
    window: Literal["rect", "hann"] = "hann",
) -> SpectralVector:
    """Spectrum -> peaks -> d_0 -> spectral vector."""
    spectrum = magnitude_spectrum(buffer, window=window)
    peaks = detect_partial_peaks(spectrum, n=n, fundamental_hint=fundamental_hint)
    d0 = compute_d0(peaks)
    vector = build_spectral_vector(peaks, d0)
    log.info("spectral vector: n=%d, d0=%.4f, rho_sum=%.4f", vector.n, d0, vector.rho_sum)
    return vector


def amplitude_transform(series: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Riemann-sum Fourier transform of a sampled amplitude series on [0, tau].

    Returns angular frequencies (rad/s) and complex transform values.
    """
    series = np.asarray(series, dtype=np.float64)
    n_fft = next_power_of_two(4 * series.size)
    values = np.fft.rfft(series, n=n_fft) * dt
    omega = 2 * np.pi * np.fft.rfftfreq(n_fft, d=dt)
    return omega, values


def dc_is_global_maximum(series: np.ndarray, dt: float) -> bool:
    """True when |F(r)(0)| strictly exceeds |F(r)(omega)| for every omega > 0."""
    _, values = amplitude_transform(series, dt)
    magnitudes = np.abs(values)
    return bool(magnitudes[0] > np.max(magnitudes[1:]))


def fourier_derivative_bound(series: np.ndarray, dt: float) -> tuple[float, float]:
    """Return (max |omega F(r)(omega)|, 2 sqrt(2) max{r(0), r(tau)}).

    Frequencies are restricted to a quarter of the sampling rate, where the
    discrete transform tracks the continuous one closely enough for the bound.
    """
    series = np.asarray(series, dtype=np.float64)
    omega, values = amplitude_transform(series, dt)
    band = omega <= 0.5 * np.pi / dt
    observed = float(np.max(np.abs(omega[band] * values[band])))
    bound = 2.0 * np.sqrt(2.0) * max(abs(series[0]), abs(series[-1]))
    return observed, bound
