"""Type definitions for tonebif."""

from __future__ import annotations

import bisect
from typing import Any, List, Literal, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    computed_field,
    field_serializer,
    field_validator,
    model_validator,
)
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

SegmentKind = Literal["delay", "attack", "hold", "decay", "sustain", "release"]
Direction = Literal["up", "down", "flat"]
Stability = Literal["stable", "unstable", "degenerate"]
EventKind = Literal[
    "supercritical-pitchfork", "subcritical-pitchfork", "double-saddle-node", "none"
]


class AudioBuffer(BaseModel):
    """Mono audio, normalized to [-1, 1] when read from disk."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    samples: Any  # numpy float64 array
    sample_rate: int

    @field_validator("samples", mode="before")
    @classmethod
    def _as_array(cls, value: Any) -> np.ndarray:
        # range is enforced by read_wav and write_wav, synthesis may exceed it before gain
        return np.asarray(value, dtype=np.float64).reshape(-1)

    @field_validator("sample_rate")
    @classmethod
    def _check_rate(cls, value: int) -> int:
        if value < 8000:
            raise ValueError(f"sample_rate {value} below 8000 Hz")
        return value

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate


class Spectrum(BaseModel):
    """One-sided magnitude spectrum of a zero-padded buffer."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    bin_freqs: Any  # Hz, uniform spacing sample_rate / n_fft
    magnitudes: Any  # raw |X_k|
    amplitudes: Any  # single-sided amplitude scale, 2|X_k| / sum(window)
    sample_rate: int
    n_fft: int
    window: Literal["rect", "hann"] = "rect"

    @property
    def resolution(self) -> float:
        return self.sample_rate / self.n_fft

    @property
    def normalized(self) -> np.ndarray:
        peak = float(np.max(self.magnitudes)) if self.magnitudes.size else 0.0
        return self.magnitudes / peak if peak > 0 else np.zeros_like(self.magnitudes)


class PartialPeak(BaseModel):
    index: int = Field(ge=1)
    frequency: float = Field(gt=0)
    amplitude: float = Field(gt=0)


class SpectralVector(BaseModel):
    """Signed partial amplitudes d_0..d_n and angular frequencies omega_0..omega_n."""

    d: List[float]
    omega: List[float]

    @model_validator(mode="after")
    def _check_vector(self) -> "SpectralVector":
        if len(self.d) != len(self.omega) or len(self.d) < 2:
            raise ValueError("d and omega must have the same length n+1 >= 2")
        if self.omega[0] != 0.0:
            raise ValueError("omega_0 must be 0")
        if any(w2 <= w1 for w1, w2 in zip(self.omega[1:], self.omega[2:])) or self.omega[1] <= 0:
            raise ValueError("omega_i must be positive and strictly increasing for i >= 1")
        if any(d <= 0 for d in self.d[1:]):
            raise ValueError("d_i must be positive for i >= 1")
        if self.rho_sum <= 0:
            raise ValueError("sum of d_i / d_1 must be positive")
        return self

    @property
    def n(self) -> int:
        return len(self.d) - 1

    @property
    def nu(self) -> List[float]:
        return [w / (2 * np.pi) for w in self.omega]

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.d, dtype=np.float64)

    @property
    def ratios(self) -> np.ndarray:
        return self.c / self.d[1]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def rho_sum(self) -> float:
        return float(sum(self.d) / self.d[1])


class EnvelopeCurve(BaseModel):
    """Upper temporal envelope gamma(t) as a natural cubic spline through knots."""

    knot_times: List[float]
    knot_values: List[float]
    t_end: Optional[float] = None

    _spline: Optional[CubicSpline] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_knots(self) -> "EnvelopeCurve":
        if len(self.knot_times) < 2 or len(self.knot_times) != len(self.knot_values):
            raise ValueError("an envelope needs at least two knots")
        if any(t2 <= t1 for t1, t2 in zip(self.knot_times, self.knot_times[1:])):
            raise ValueError("knot times must be strictly increasing")
        if any(v < 0 for v in self.knot_values):
            raise ValueError("knot values must be nonnegative")
        return self

    @property
    def spline(self) -> CubicSpline:
        if self._spline is None:
            self._spline = CubicSpline(
                np.asarray(self.knot_times), np.asarray(self.knot_values), bc_type="natural"
            )
        return self._spline

    @property
    def t_start(self) -> float:
        return 0.0 if self.knot_times[0] > 0 else self.knot_times[0]

    @property
    def t_stop(self) -> float:
        return self.t_end if self.t_end is not None else self.knot_times[-1]

    def __call__(self, t: Any) -> Any:
        """Evaluate gamma, extended by constants outside the knot range and clamped at 0."""
        tt = np.clip(np.asarray(t, dtype=np.float64), self.knot_times[0], self.knot_times[-1])
        values = np.maximum(self.spline(tt), 0.0)
        return float(values) if values.ndim == 0 else values

    def derivative(self, t: Any) -> Any:
        tt = np.asarray(t, dtype=np.float64)
        values = self.spline(tt, 1)
        inside = (tt >= self.knot_times[0]) & (tt <= self.knot_times[-1])
        values = np.where(inside, values, 0.0)
        return float(values) if values.ndim == 0 else values

    def inverse(self, value: float, t_lo: float, t_hi: float) -> float:
        """gamma^-1(value) on a monotone piece [t_lo, t_hi], to within 1e-6 s."""
        g_lo, g_hi = self(t_lo), self(t_hi)
        if (g_lo - value) * (g_hi - value) > 0:
            # value outside the piece's range: nearest endpoint
            return t_lo if abs(g_lo - value) <= abs(g_hi - value) else t_hi
        if g_lo == value:
            return t_lo
        if g_hi == value:
            return t_hi
        return float(brentq(lambda t: self(t) - value, t_lo, t_hi, xtol=1e-6))


class SegmentPlan(BaseModel):
    borders: List[float]
    labels: List[SegmentKind]
    breaking_points: List[List[float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_plan(self) -> "SegmentPlan":
        if len(self.borders) != len(self.labels) + 1:
            raise ValueError("need one more border than labels")
        if any(t2 <= t1 for t1, t2 in zip(self.borders, self.borders[1:])):
            raise ValueError("borders must be strictly increasing")
        if not self.breaking_points:
            self.breaking_points = [[] for _ in self.labels]
        for (t0, t1), points in zip(self.intervals, self.breaking_points):
            if any(not (t0 < p < t1) for p in points):
                raise ValueError("breaking points must lie strictly inside their interval")
        return self

    @property
    def intervals(self) -> List[tuple[float, float]]:
        return list(zip(self.borders[:-1], self.borders[1:]))


class MuStep(BaseModel):
    t: float
    mu: float


class MuSchedule(BaseModel):
    """Piecewise-constant, right-continuous bifurcation parameter mu(t)."""

    steps: List[MuStep]

    @model_validator(mode="after")
    def _check_steps(self) -> "MuSchedule":
        if not self.steps:
            raise ValueError("a schedule needs at least one step")
        if self.steps[0].t != 0.0:
            raise ValueError("the first switch must be at t = 0")
        times = self.switch_times
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("switch times must be strictly increasing")
        return self

    @classmethod
    def from_pairs(cls, times: List[float], values: List[float]) -> "MuSchedule":
        return cls(steps=[MuStep(t=t, mu=mu) for t, mu in zip(times, values)])

    @property
    def switch_times(self) -> List[float]:
        return [step.t for step in self.steps]

    @property
    def values(self) -> List[float]:
        return [step.mu for step in self.steps]

    def evaluate(self, t: float) -> float:
        i = bisect.bisect_right(self.switch_times, t) - 1
        return self.steps[max(i, 0)].mu


class ControllerModel(BaseModel):
    """The fitted Eulerian model: constants, schedule, plan and initial state."""

    n: int
    spectral: SpectralVector
    a: int
    b: float
    alpha: float
    schedule: MuSchedule
    plan: SegmentPlan
    rho0: float
    x0: List[float]
    y0: List[float]
    duration: float

    @field_validator("a")
    @classmethod
    def _check_a(cls, value: int) -> int:
        if value not in (-1, 1):
            raise ValueError("a must be -1 or +1")
        return value

    @field_validator("schedule", mode="before")
    @classmethod
    def _schedule_from_steps(cls, value: Any) -> Any:
        return {"steps": value} if isinstance(value, list) else value

    @field_serializer("schedule")
    def _schedule_as_steps(self, schedule: MuSchedule) -> List[dict]:
        return [{"t": step.t, "mu": step.mu} for step in schedule.steps]

    @computed_field  # type: ignore[prop-decorator]
    @property
    def omega(self) -> List[float]:
        return list(self.spectral.omega)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def c(self) -> List[float]:
        return list(self.spectral.d)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def rho_sum(self) -> float:
        return self.spectral.rho_sum

    @computed_field  # type: ignore[prop-decorator]
    @property
    def borders(self) -> List[float]:
        return list(self.plan.borders)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def breaking_points(self) -> List[List[float]]:
        return [list(points) for points in self.plan.breaking_points]

    @property
    def g_coefficients(self) -> tuple[float, float]:
        """Coefficients of r_1^2 and r_1^4 in g once rho_sum is folded in."""
        s = self.spectral.rho_sum
        return self.a * s**2, self.b * s**4


class ScalarSeries(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: Any
    rho: Any
    mu: Any


class Trajectory(BaseModel):
    """Radial amplitudes and analytic phases on a uniform grid."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    times: Any  # shape (T,)
    r: Any  # shape (T, n+1)
    theta: Any  # shape (T, n+1)
    mu: Any  # shape (T,)
    x: Optional[Any] = None
    y: Optional[Any] = None

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


class Equilibrium(BaseModel):
    rho: float
    stability: Stability
    derivative: float


class EquilibriumSet(BaseModel):
    mu: float
    a: float
    b: float
    alpha: float
    roots: List[Equilibrium]

    @property
    def positive(self) -> List[Equilibrium]:
        return [root for root in self.roots if root.rho > 0]


class TransitionVarieties(BaseModel):
    pitchfork_mu: float = 0.0
    pitchfork_kind: EventKind
    double_sn_mu: Optional[float] = None
    double_sn_rho: Optional[float] = None


class TorusInfo(BaseModel):
    rho: float
    radii: List[float]
    dimension: int
    stability: Stability


class BifurcationEvent(BaseModel):
    time: float
    kind: EventKind
    mu_before: float
    mu_after: float
    tori_before: int
    tori_after: int
    torus_radii: List[List[float]] = Field(default_factory=list)


class IntervalInventory(BaseModel):
    t_start: float
    t_end: float
    mu: float
    label: Optional[SegmentKind] = None
    origin_stability: Stability
    tori: List[TorusInfo]


class HysteresisReport(BaseModel):
    found: bool
    t_up: Optional[float] = None
    t_down: Optional[float] = None


class BifurcationReport(BaseModel):
    events: List[BifurcationEvent]
    inventories: List[IntervalInventory]
    hysteresis: HysteresisReport
    lines: List[str]
    notes: List[str] = Field(default_factory=list)


class BandDeviation(BaseModel):
    k: int
    low_hz: float
    high_hz: float
    deviation: float
    passed: bool


class ModulationReport(BaseModel):
    bands: List[BandDeviation]
    threshold: float
    passed: bool
    warning: Optional[str] = None


class VerificationReport(BaseModel):
    ratios_original: List[float]
    ratios_synthesized: List[float]
    deltas: List[float]
    fundamental_original: float
    fundamental_synthesized: float
    warning: Optional[str] = None
    envelope_max_error: Optional[float] = None
    modulation: Optional[ModulationReport] = None
