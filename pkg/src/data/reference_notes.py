"""
Reference C#4 notes (piano and violin) with their published models.

Each note carries the measured partial peaks, the segment borders and
breaking points, the per-subinterval mu values and the constants
(alpha, a, b). They serve as synthetic ground truth: a rendered note is fed
back through analyze/fit and the recovered values are compared with these.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, List

from pydantic import BaseModel

from src.control.controller import initial_state
from src.models import (
    AudioBuffer,
    ControllerModel,
    MuSchedule,
    ScalarSeries,
    SegmentKind,
    SegmentPlan,
    SpectralVector,
)
from src.synthesis.additive import render_model

log = logging.getLogger(__name__)


class ReferenceNote(BaseModel):
    name: str
    nu: List[float]  # partial frequencies nu_1..nu_n in Hz
    d: List[float]  # d_0..d_n, d_0 signed
    borders: List[float]
    labels: List[SegmentKind]
    breaking_points: List[List[float]]
    mus: List[float]
    alpha: float
    a: int
    b: float
    rho0: float
    printed_x0: List[float]
    printed_ratios: List[float]

    @property
    def spectral(self) -> SpectralVector:
        return SpectralVector(d=self.d, omega=[0.0] + [2 * math.pi * v for v in self.nu])

    @property
    def switch_times(self) -> List[float]:
        times: List[float] = []
        for t, points in zip(self.borders[:-1], self.breaking_points):
            times.append(t)
            times.extend(points)
        return times


PIANO = ReferenceNote(
    name="piano",
    nu=[274.4, 548.9, 823.3, 1100.0, 1376.6, 1655.5],
    d=[-0.1451, 0.1069, 0.0923, 0.0604, 0.0411, 0.0559, 0.0412],
    borders=[0.0, 0.084, 0.112, 0.16, 0.293, 3.5],
    labels=["delay", "attack", "decay", "sustain", "release"],
    breaking_points=[[], [0.0865, 0.089, 0.0991], [], [], [0.467, 0.6785]],
    mus=[-1.0, 1902.0, 498.0, 220.0, 14.0, -9.5, 0.28, -4.5, -3.2, -0.8],
    alpha=1.0,
    a=-1,
    b=0.0,
    rho0=0.001,
    printed_x0=[1e-4 * v for v in (-5.74, 4.23, 3.65, 2.39, 1.62, 2.21, 1.63)],
    printed_ratios=[1.0, 0.8619, 0.566, 0.376, 0.514, 0.375],
)

VIOLIN = ReferenceNote(
    name="violin",
    nu=[277.6, 555.2, 832.8, 1110.0, 1387.6, 1665.2],
    d=[1e-4 * v for v in (-1438, 3746, 1356, 421, 192, 119, 309)],
    borders=[0.0, 0.345, 0.5717, 2.107, 2.5],
    labels=["delay", "attack", "sustain", "release"],
    breaking_points=[[], [0.392], [], [2.22]],
    mus=[-0.1, 3.36, 0.11, -0.072, -0.165, -0.6],
    alpha=23.0,
    a=1,
    b=-2.15,
    rho0=0.01,
    printed_x0=[1e-4 * v for v in (-23, 61, 22, 7, 3, 2, 5)],
    printed_ratios=[1.0, 0.362, 0.1121, 0.0513, 0.0314, 0.0813],
)

REFERENCE_NOTES: Dict[str, ReferenceNote] = {"piano": PIANO, "violin": VIOLIN}


def get_reference_note(name: str) -> ReferenceNote:
    try:
        return REFERENCE_NOTES[name]
    except KeyError:
        raise KeyError(f"unknown reference note {name!r}; choose from {sorted(REFERENCE_NOTES)}") from None


def reference_model(note: ReferenceNote) -> ControllerModel:
    """ControllerModel for a reference note, initial state placed on its leaf."""
    spectral = note.spectral
    x0, y0 = initial_state(spectral, note.rho0)
    return ControllerModel(
        n=spectral.n,
        spectral=spectral,
        a=note.a,
        b=note.b,
        alpha=note.alpha,
        schedule=MuSchedule.from_pairs(note.switch_times, note.mus),
        plan=SegmentPlan(borders=note.borders, labels=note.labels, breaking_points=note.breaking_points),
        rho0=note.rho0,
        x0=x0,
        y0=y0,
        duration=note.borders[-1],
    )


def render_reference_note(note: ReferenceNote, sample_rate: int = 44100) -> tuple[AudioBuffer, float, ScalarSeries]:
    """Integrate the printed schedule and synthesize the note."""
    buffer, gain, series = render_model(reference_model(note), sample_rate)
    log.info("✅ rendered %s reference: %.2f s at %d Hz (gain %.4f)", note.name, buffer.duration, sample_rate, gain)
    return buffer, gain, series
