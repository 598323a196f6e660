"""The four pipeline stages on in-memory objects, shared by the CLI and the workflow graph."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.analysis.envelope import default_peak_distance, segment_envelope, upper_envelope
from src.analysis.spectral import (
    build_spectral_vector,
    compute_d0,
    detect_partial_peaks,
    magnitude_spectrum,
)
from src.artifacts import EnvelopeArtifact, SpectralArtifact
from src.bifurcation.report import bifurcation_report
from src.control.controller import build_model
from src.dynamics.integrators import integrate_full, relative_leaf_residual
from src.errors import LeafResidualError
from src.models import (
    AudioBuffer,
    BifurcationReport,
    ControllerModel,
    ScalarSeries,
    Trajectory,
    VerificationReport,
)
from src.synthesis.additive import render_model, signal_from_trajectory
from src.synthesis.verify import compare_notes, envelope_max_error, verify_modulation_bound

log = logging.getLogger(__name__)

LEAF_RESIDUAL_LIMIT = 1e-6


class SimulationResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    buffer: AudioBuffer
    gain: float
    series: Optional[ScalarSeries] = None
    trajectory: Optional[Trajectory] = None
    leaf_residual: Optional[float] = None
    report: BifurcationReport


def analyze_stage(
    buffer: AudioBuffer, n: Optional[int] = None, source: str = "<memory>"
) -> SpectralArtifact:
    spectrum = magnitude_spectrum(buffer, window="hann")
    peaks = detect_partial_peaks(spectrum, n=n)
    d0 = compute_d0(peaks)
    return SpectralArtifact(
        source=Path(source).name,
        sample_rate=buffer.sample_rate,
        peaks=peaks,
        d0=d0,
        spectral=build_spectral_vector(peaks, d0),
    )


def envelope_stage(
    buffer: AudioBuffer,
    np_samples: Optional[int] = None,
    fundamental: Optional[float] = None,
    source: str = "<memory>",
) -> EnvelopeArtifact:
    if np_samples is None:
        np_samples = default_peak_distance(buffer, fundamental)
    curve = upper_envelope(buffer, np_samples)
    return EnvelopeArtifact(
        source=Path(source).name,
        np_samples=np_samples,
        curve=curve,
        plan=segment_envelope(curve),
    )


def fit_stage(
    spectral: SpectralArtifact,
    envelope: EnvelopeArtifact,
    epsilon: Optional[float] = None,
) -> ControllerModel:
    dt = 1.0 / spectral.sample_rate
    return build_model(spectral.spectral, envelope.curve, envelope.plan, epsilon=epsilon, dt=dt)


def simulate_stage(model: ControllerModel, sample_rate: int, full: bool = False) -> SimulationResult:
    """Scalar fast path by default, the full 2(n+1)-dimensional system when ``full``."""
    report = bifurcation_report(model)
    if not full:
        buffer, gain, series = render_model(model, sample_rate)
        return SimulationResult(buffer=buffer, gain=gain, series=series, report=report)

    trajectory = integrate_full(model, dt=1.0 / sample_rate)
    residual = relative_leaf_residual(trajectory, model.spectral)
    log.info("leaf residual %.3e", residual)
    if residual >= LEAF_RESIDUAL_LIMIT:
        raise LeafResidualError(residual, LEAF_RESIDUAL_LIMIT)
    buffer, gain = signal_from_trajectory(trajectory, sample_rate)
    return SimulationResult(
        buffer=buffer, gain=gain, trajectory=trajectory, leaf_residual=residual, report=report
    )


def verify_stage(
    original: AudioBuffer,
    synthesized: AudioBuffer,
    n: int,
    model: Optional[ControllerModel] = None,
) -> VerificationReport:
    """Ratio comparison; with a model also the envelope error and the modulation bound."""
    report = compare_notes(original, synthesized, n)
    if model is None:
        return report

    _, gain, series = render_model(model, synthesized.sample_rate)
    r1 = np.asarray(series.rho) / model.spectral.rho_sum
    updates: dict[str, Any] = {
        "modulation": verify_modulation_bound(synthesized, r1, model.spectral, gain=gain),
        "envelope_max_error": envelope_max_error(
            synthesized, upper_envelope(original), gain=gain
        ),
    }
    return report.model_copy(update=updates)
