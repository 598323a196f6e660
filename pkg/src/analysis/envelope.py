"""Upper temporal envelope extraction and delay/attack/decay/sustain/release segmentation."""

from __future__ import annotations

import logging
from typing import List, NamedTuple, Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.optimize import brentq
from scipy.signal import find_peaks

from src.analysis.spectral import detect_partial_peaks, magnitude_spectrum
from src.config import get_hearing_threshold, get_min_piece_duration, get_sustain_slope_ratio
from src.errors import DegenerateEnvelopeError, SilentSignalError
from src.models import AudioBuffer, Direction, EnvelopeCurve, SegmentKind, SegmentPlan

log = logging.getLogger(__name__)

GRID_STEP = 0.0005
EXACTLY_FLAT = 1e-9
PEAK_TOLERANCE = 0.005
RATE_WINDOW = 0.02
BREAK_RATIO = 3.0
STEADY_RATE = 2.0
LOG_FLOOR = 1e-4

Piece = tuple[float, float, Direction]


def default_peak_distance(buffer: AudioBuffer, fundamental: Optional[float] = None) -> int:
    """One fundamental period in samples."""
    if fundamental is None:
        peaks = detect_partial_peaks(magnitude_spectrum(buffer, window="hann"), n=1)
        fundamental = peaks[0].frequency
    return max(2, int(round(buffer.sample_rate / fundamental)))


def upper_envelope(
    buffer: AudioBuffer,
    np_samples: Optional[int] = None,
    fundamental: Optional[float] = None,
) -> EnvelopeCurve:
    """Spline through the local maxima of |x| separated by at least np samples."""
    if np_samples is None:
        np_samples = default_peak_distance(buffer, fundamental)
    if np_samples < 2:
        raise ValueError("np must be at least 2 samples")
    if buffer.samples.size <= 2 * np_samples:
        raise DegenerateEnvelopeError(
            f"buffer of {buffer.samples.size} samples is too short for np={np_samples}"
        )

    magnitude = np.abs(buffer.samples)
    # find_peaks keeps the larger of two maxima closer than `distance`
    knots, _ = find_peaks(magnitude, distance=np_samples)
    if knots.size < 2:
        raise DegenerateEnvelopeError(f"only {knots.size} local maxima found")

    log.info("envelope: %d knots (np=%d)", knots.size, np_samples)
    return EnvelopeCurve(
        knot_times=(knots / buffer.sample_rate).tolist(),
        knot_values=magnitude[knots].tolist(),
        t_end=buffer.duration,
    )


def _grid(t0: float, t1: float, step: float = GRID_STEP) -> np.ndarray:
    count = max(int(np.ceil((t1 - t0) / step)), 2)
    return np.linspace(t0, t1, count + 1)


def _crossing(func, t_lo: float, t_hi: float) -> float:
    f_lo, f_hi = func(t_lo), func(t_hi)
    if f_lo == 0:
        return t_lo
    if f_lo * f_hi > 0:
        return 0.5 * (t_lo + t_hi)
    return float(brentq(func, t_lo, t_hi, xtol=1e-7))


def _classify(slopes: np.ndarray, flat_slope: float) -> np.ndarray:
    return np.where(slopes > flat_slope, 1, np.where(slopes < -flat_slope, -1, 0))


_DIRECTIONS: dict[int, Direction] = {1: "up", -1: "down", 0: "flat"}


def monotonic_pieces(
    gamma: EnvelopeCurve,
    flat_slope: float = 0.0,
    t_span: Optional[tuple[float, float]] = None,
    min_duration: float = 0.0,
) -> List[Piece]:
    """Maximal intervals of constant slope class.

    With ``flat_slope == 0`` the classes are the sign of gamma' and zero-slope
    plateaus attach to the preceding piece. With ``flat_slope > 0`` slopes with
    magnitude at most ``flat_slope`` form "flat" pieces. Pieces shorter than
    ``min_duration`` are absorbed by their predecessor; the first piece is kept.
    """
    t0, t1 = t_span if t_span is not None else (gamma.t_start, gamma.t_stop)
    grid = _grid(t0, t1)
    classes = _classify(gamma.derivative(grid), flat_slope)

    if flat_slope == 0:
        nonzero = np.flatnonzero(classes)
        if nonzero.size == 0:
            return [(t0, t1, "flat")]
        classes[: nonzero[0]] = classes[nonzero[0]]
        for i in range(1, classes.size):
            if classes[i] == 0:
                classes[i] = classes[i - 1]

    pieces: List[list] = []
    start = t0
    for i in range(1, classes.size):
        if classes[i] == classes[i - 1]:
            continue
        pair = {int(classes[i - 1]), int(classes[i])}
        level = flat_slope if 1 in pair and -1 not in pair else (
            -flat_slope if -1 in pair and 1 not in pair else 0.0
        )
        boundary = _crossing(lambda t: gamma.derivative(t) - level, grid[i - 1], grid[i])
        pieces.append([start, boundary, int(classes[i - 1])])
        start = boundary
    pieces.append([start, t1, int(classes[-1])])

    if min_duration > 0:
        pieces = _absorb_short(pieces, min_duration)

    return [(float(a), float(b), _DIRECTIONS[c]) for a, b, c in pieces]


def _absorb_short(pieces: List[list], min_duration: float) -> List[list]:
    changed = True
    while changed and len(pieces) > 1:
        changed = False
        for i, (a, b, _) in enumerate(pieces):
            if i == 0 or b - a >= min_duration:
                continue
            pieces[i - 1][1] = b
            del pieces[i]
            changed = True
            break
    merged: List[list] = [pieces[0]]
    for piece in pieces[1:]:
        if piece[2] == merged[-1][2]:
            merged[-1][1] = piece[1]
        else:
            merged.append(piece)
    return merged


class RateBreak(NamedTuple):
    """Corner of log(gamma): the regression slopes on either side of t."""

    t: float
    before: float
    after: float

    @property
    def flattening(self) -> bool:
        return abs(self.after) < abs(self.before)


def log_rates(
    gamma: EnvelopeCurve, t_span: tuple[float, float], window: float = RATE_WINDOW
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares slopes of log(gamma) over the windows left and right of each grid time.

    Returns ``(centers, before, after)``; a side touching values below
    ``LOG_FLOOR`` times the span maximum is NaN.
    """
    grid = _grid(*t_span)
    step = float(grid[1] - grid[0])
    k = max(int(round(window / step)), 2)
    if grid.size < 2 * k + 1:
        empty = np.empty(0)
        return empty, empty, empty

    values = gamma(grid)
    valid = values > LOG_FLOOR * float(np.max(values))
    logs = np.log(np.where(valid, values, 1.0))

    x = np.arange(k + 1) * step
    x -= x.mean()
    slopes = sliding_window_view(logs, k + 1) @ x / float(x @ x)
    slopes[~np.all(sliding_window_view(valid, k + 1), axis=1)] = np.nan

    count = grid.size - 2 * k
    return grid[k : k + count], slopes[:count], slopes[k : k + count]


def rate_breaks(
    gamma: EnvelopeCurve,
    t_span: tuple[float, float],
    window: float = RATE_WINDOW,
    ratio: float = BREAK_RATIO,
    steady_rate: float = STEADY_RATE,
) -> List[RateBreak]:
    """Times where the exponential rate of gamma changes by at least ``ratio``.

    Both sides keep one sign unless one of them is steadier than
    ``steady_rate``, and the faster side is at least ``steady_rate`` per second.
    """
    centers, before, after = log_rates(gamma, t_span, window)
    if centers.size == 0:
        return []

    fast, slow = np.maximum(np.abs(before), np.abs(after)), np.minimum(np.abs(before), np.abs(after))
    one_sign = (before * after > 0) | (slow < steady_rate)
    usable = np.isfinite(before) & np.isfinite(after) & one_sign & (fast >= steady_rate)

    tiny = 1e-3 * steady_rate
    score = np.log((np.abs(before) + tiny) / (np.abs(after) + tiny))
    score = np.where(usable, score, 0.0)

    step = float(centers[1] - centers[0]) if centers.size > 1 else GRID_STEP
    distance = max(int(round(window / step)), 1)
    found: List[RateBreak] = []
    for signed in (score, -score):
        peaks, _ = find_peaks(signed, height=np.log(ratio), distance=distance)
        found.extend(RateBreak(float(centers[i]), float(before[i]), float(after[i])) for i in peaks)
    found.sort(key=lambda b: b.t)
    log.debug("rate breaks on [%.4f, %.4f]: %s", t_span[0], t_span[1], [round(b.t, 4) for b in found])
    return found


def _peak_index(values: np.ndarray, start: int) -> tuple[int, int]:
    """Argmax after ``start`` and the end of the plateau within PEAK_TOLERANCE of it."""
    top = start + int(np.argmax(values[start:]))
    level = (1.0 - PEAK_TOLERANCE) * values[top]
    end = top
    while end + 1 < values.size and values[end + 1] >= level:
        end += 1
    return top, end


def segment_envelope(
    gamma: EnvelopeCurve,
    threshold: Optional[float] = None,
    slope_ratio: Optional[float] = None,
    min_piece: Optional[float] = None,
) -> SegmentPlan:
    """Split gamma into delay/attack/(hold|decay)/sustain/release intervals.

    The peak splits gamma into a rise and a fall. The attack ends at the later of
    the last steep rise and the last flattening rate break of the rise; what is
    left of the rise is a sustain unless it is shorter than the first piece of the
    fall. Rate breaks in the fall place decay, sustain and release.
    """
    threshold = get_hearing_threshold() if threshold is None else threshold
    slope_ratio = get_sustain_slope_ratio() if slope_ratio is None else slope_ratio
    min_piece = get_min_piece_duration() if min_piece is None else min_piece

    t0, t_end = gamma.t_start, gamma.t_stop
    grid = _grid(t0, t_end)
    values = gamma(grid)
    if np.max(values) < threshold:
        raise SilentSignalError(
            f"envelope peak {np.max(values):.4f} never reaches threshold {threshold:.4f}"
        )

    first = int(np.argmax(values >= threshold))
    top, peak = _peak_index(values, first)
    slopes = gamma.derivative(grid)
    peak_slope = float(np.max(slopes[first : peak + 1]))
    if peak_slope <= EXACTLY_FLAT:
        raise SilentSignalError("envelope has no rising piece after the delay")
    flat_slope = slope_ratio * peak_slope

    # the delay stops at the foot of the rise through the threshold
    delay_end = t0
    if first > 0:
        k = first - 1
        while k > 0 and slopes[k] > flat_slope:
            k -= 1
        while k > 0 and slopes[k] > 0 and values[k - 1] < values[k]:
            k -= 1
        if grid[k] - t0 >= min_piece:
            delay_end = float(grid[k])

    t_peak = float(grid[peak])
    if t_end - t_peak < min_piece:
        t_peak = t_end

    steep = np.flatnonzero(slopes[first : peak + 1] > flat_slope)
    t_steep = float(grid[min(first + int(steep[-1]) + 1, peak)])
    rise = rate_breaks(gamma, (delay_end, t_peak)) if t_peak - delay_end > 2 * RATE_WINDOW else []
    flattening = [b.t for b in rise if b.flattening and b.t <= t_peak - min_piece]
    attack_end = max([t_steep] + flattening[-1:])

    has_fall = t_end > t_peak
    fall = rate_breaks(gamma, (t_peak, t_end)) if t_end - t_peak > 2 * RATE_WINDOW else []
    decay_end = next((b.t for b in fall if b.flattening), None)
    first_fall = (decay_end if decay_end is not None else t_end) - t_peak

    tail = t_peak - attack_end
    rising_sustain = attack_end > delay_end and tail >= min_piece and not (has_fall and tail <= first_fall)
    if not rising_sustain:
        attack_end = float(grid[top])

    fades_out = float(values[-1]) < threshold
    borders: List[float] = [t0]
    labels: List[SegmentKind] = []

    def close(stop: float, label: SegmentKind) -> None:
        if label in ("sustain", "hold"):
            span = _grid(borders[-1], stop)
            if float(np.max(np.abs(gamma.derivative(span)))) < EXACTLY_FLAT:
                label = "hold"
        borders.append(stop)
        labels.append(label)

    if delay_end > t0:
        close(delay_end, "delay")
    close(attack_end, "attack")

    if rising_sustain:
        if has_fall and fades_out:
            close(t_peak, "sustain")
            close(t_end, "release")
        else:
            close(t_end, "sustain")
    elif has_fall:
        if decay_end is not None:
            close(decay_end, "decay")
            release_at = next((b.t for b in fall if not b.flattening and b.t > decay_end), None)
            if not fades_out:
                close(t_end, "sustain")
            elif release_at is not None:
                close(release_at, "sustain")
                close(t_end, "release")
            else:
                close(t_end, "release")
        else:
            close(t_end, "release" if fades_out else "sustain")

    borders[-1] = t_end
    plan = SegmentPlan(borders=borders, labels=labels)
    log.info(
        "✅ segments: %s",
        ", ".join(f"{lab}[{a:.4f},{b:.4f}]" for lab, (a, b) in zip(labels, plan.intervals)),
    )
    return plan


def sustain_has_two_steady_states(
    gamma: EnvelopeCurve, interval: tuple[float, float], threshold: Optional[float] = None
) -> bool:
    """A sustain spanning a level change of at least the hearing threshold holds two steady states."""
    threshold = get_hearing_threshold() if threshold is None else threshold
    return abs(gamma(interval[1]) - gamma(interval[0])) >= threshold
