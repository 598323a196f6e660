"""Additive re-synthesis of a note from its fundamental amplitude r_1(t)."""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np
from scipy.integrate import trapezoid

from src.control.controller import reduce_to_scalar
from src.dynamics.integrators import integrate_scalar
from src.models import AudioBuffer, ControllerModel, ScalarSeries, SpectralVector, Trajectory

log = logging.getLogger(__name__)


def synthesize(
    r1_series: np.ndarray,
    spectral: SpectralVector,
    sample_rate: int,
    phases: Optional[np.ndarray] = None,
) -> tuple[AudioBuffer, float]:
    """sum_i (d_i / d_1) r_1(t) cos(omega_i t + theta_i), peak-normalized only above 1.

    Returns the buffer and the gain applied (1.0 when no normalization happened).
    """
    r1 = np.asarray(r1_series, dtype=np.float64)
    t = np.arange(r1.size) / sample_rate
    omega = np.asarray(spectral.omega, dtype=np.float64)
    theta = np.zeros_like(omega) if phases is None else np.asarray(phases, dtype=np.float64)

    signal = np.zeros_like(t)
    for ratio, w, th in zip(spectral.ratios, omega, theta):
        signal += ratio * np.cos(w * t + th)
    signal *= r1
    return _normalized(signal, sample_rate)


def signal_from_trajectory(trajectory: Trajectory, sample_rate: int) -> tuple[AudioBuffer, float]:
    """The audible note sum_i x_i(t) of a full-system trajectory."""
    return _normalized(np.asarray(trajectory.x).sum(axis=1), sample_rate)


def _normalized(signal: np.ndarray, sample_rate: int) -> tuple[AudioBuffer, float]:
    gain = 1.0
    peak = float(np.max(np.abs(signal))) if signal.size else 0.0
    if peak > 1.0:
        gain = 1.0 / peak
        signal = signal * gain
        log.info("output peak %.3f normalized with gain %.4f", peak, gain)
    return AudioBuffer(samples=signal, sample_rate=sample_rate), gain


def estimated_peaks(
    r1_series: np.ndarray, spectral: SpectralVector, dt: float
) -> List[tuple[float, float]]:
    """Predicted spectral peaks (nu_i, d_i / (2 d_1) * int r_1) for i >= 1."""
    integral = float(trapezoid(np.asarray(r1_series, dtype=np.float64), dx=dt))
    return [
        (nu, ratio * integral / 2.0)
        for nu, ratio in zip(spectral.nu[1:], spectral.ratios[1:])
    ]


def simulate_model(model: ControllerModel, sample_rate: int) -> ScalarSeries:
    """Scalar fast path over the whole note on the audio grid."""
    rho0, _, _ = reduce_to_scalar(model)
    return integrate_scalar(
        rho0,
        model.schedule,
        model.a,
        model.b,
        model.alpha,
        (0.0, model.duration),
        1.0 / sample_rate,
    )


def render_model(model: ControllerModel, sample_rate: int) -> tuple[AudioBuffer, float, ScalarSeries]:
    series = simulate_model(model, sample_rate)
    r1 = np.asarray(series.rho) / model.spectral.rho_sum
    buffer, gain = synthesize(r1, model.spectral, sample_rate)
    return buffer, gain, series
