"""Fitting the piecewise-constant bifurcation control mu(t) to an upper envelope.

The scalar proxy rho = S r_1 (S = sum d_i / d_1) obeys
rho' = alpha rho (mu_j + a rho^2 + b rho^4) on each subinterval, and mu_j is
chosen so rho tracks gamma within the fit tolerance.
"""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from src.analysis.envelope import sustain_has_two_steady_states
from src.config import (
    get_default_sample_rate,
    get_epsilon,
    get_fit_tolerance,
    get_max_breaking_points,
    get_mu0_override,
    get_rho0_override,
    get_slope_window,
)
from src.dynamics.integrators import rk4_path
from src.errors import FitInfeasibleError, RefinementError, SingularSystemError
from src.models import (
    ControllerModel,
    EnvelopeCurve,
    MuSchedule,
    MuStep,
    SegmentPlan,
    SpectralVector,
)

log = logging.getLogger(__name__)

RHO0_CEILING = 0.01
MAX_HALVINGS = 48
# share of tol an accepted subinterval may add to the offset it started with
OFFSET_SHARE = 0.125


class SustainFit(BaseModel):
    a: int
    b: float
    mu: float
    alpha: float
    s1: float
    s2: float


class Refinement(BaseModel):
    points: List[float]
    mus: List[float]
    rho_end: float
    max_error: float


def default_constants() -> tuple[float, int, float]:
    """(alpha, a, b) for envelopes with at most one sustain steady state."""
    return 1.0, -1, 0.0


def delay_init(b: float) -> tuple[float, float]:
    """Upper bounds (mu_0, rho(0)) keeping the delay segment at the origin."""
    if b == 0:
        return -1.0, RHO0_CEILING
    return -abs(1.0 / (4.0 * b)), min(RHO0_CEILING, abs(2.0 * b) ** -0.5)


def envelope_slope(gamma: EnvelopeCurve, t: float, window: Optional[float] = None) -> float:
    """Right-hand slope of gamma at t from one-sided three-point stencils.

    A linear and a log-domain stencil are each taken over ``window`` and half of
    it; the one whose two estimates agree better gives the half-window value.
    Within one window of the curve's end the stencils look backward.
    """
    h = get_slope_window() if window is None else window
    if h <= 0:
        raise ValueError("slope window must be positive")
    side = 1.0 if t + h <= gamma.t_stop else -1.0

    estimates: dict[str, List[float]] = {"linear": [], "log": []}
    for span in (h, 0.5 * h):
        g = np.asarray(gamma(t + side * span * np.array([0.0, 0.5, 1.0])), dtype=np.float64)
        estimates["linear"].append(side * (-3.0 * g[0] + 4.0 * g[1] - g[2]) / span)
        if np.all(g > 0):
            logs = np.log(g)
            estimates["log"].append(side * g[0] * (-3.0 * logs[0] + 4.0 * logs[1] - logs[2]) / span)

    _, slope = min((abs(v[0] - v[1]), v[1]) for v in estimates.values() if len(v) == 2)
    return float(slope)



def tune_mu(rho_at_border: float, target_slope: float, a: float, b: float, alpha: float) -> float:
    """mu such that rho'(t_j+) equals the envelope slope."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    if rho_at_border == 0:
        raise FitInfeasibleError("rho vanished at a border; continuity was lost")
    r2 = rho_at_border * rho_at_border
    return target_slope / (alpha * rho_at_border) - a * r2 - b * r2 * r2



def fit_sustain_constants(
    gamma: EnvelopeCurve,
    sustain: tuple[float, float],
    epsilon: Optional[float] = None,
) -> SustainFit:
    """Constants (a, b, mu_js, alpha) for a sustain holding two steady states.

    Both steady states s1, s2 are made equilibria of the scalar equation and
    alpha matches the envelope slope at the midpoint value (s1 + s2) / 2.
    """
    epsilon = get_epsilon() if epsilon is None else epsilon
    if not 0 < epsilon <= 0.05:
        raise ValueError("epsilon must lie in (0, 0.05]")

    t_start, t_stop = sustain
    g1, g2 = float(gamma(t_start)), float(gamma(t_stop))
    if abs(g2 - g1) < 1e-12:
        raise SingularSystemError("sustain levels coincide; no direction to fit")

    a = 1 if g2 > g1 else -1
    # epsilon moves the starting level across the unstable root
    s1 = g1 - epsilon if a == 1 else g1 + epsilon
    s2 = g2
    if s1 <= 0:
        raise FitInfeasibleError(f"sustain start {g1:.4f} does not exceed epsilon {epsilon}")
    if abs(s1 - s2) < 1e-12:
        raise SingularSystemError("steady states s1 and s2 coincide")

    matrix = np.array([[1.0, s1**4], [1.0, s2**4]])
    rhs = np.array([-a * s1**2, -a * s2**2])
    try:
        mu, b = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystemError(str(e)) from e
    if a * b >= 0:
        raise FitInfeasibleError(f"fitted b={b:.4f} has the wrong sign for a={a}")

    mid = 0.5 * (s1 + s2)
    t_mid = gamma.inverse(mid, t_start, t_stop)
    growth = mid * (mu + a * mid**2 + b * mid**4)
    if growth == 0:
        raise FitInfeasibleError("midpoint sits on an equilibrium; alpha undefined")
    alpha = float(gamma.derivative(t_mid)) / growth
    if alpha <= 0:
        raise FitInfeasibleError(f"slope matching gives alpha={alpha:.4f} <= 0")

    log.info("sustain fit: a=%d b=%.4f mu=%.4f alpha=%.3f", a, b, mu, alpha)
    return SustainFit(a=a, b=float(b), mu=float(mu), alpha=float(alpha), s1=s1, s2=s2)


def _candidate_time(
    gamma: EnvelopeCurve,
    t_left: float,
    t_right: float,
    monotone: bool,
    m: int,
) -> float:
    if monotone:
        g_left, g_right = gamma(t_left), gamma(t_right)
        value = g_left + (g_right - g_left) / 2**m
        return gamma.inverse(value, t_left, t_right)
    return t_left + (t_right - t_left) / 2**m


def _shorter_ends(
    gamma: EnvelopeCurve,
    grid: np.ndarray,
    left: int,
    end: int,
    monotone: bool,
    m: int,
) -> List[int]:
    """Grid indices of the halving candidates after the m-th, longest first."""
    t0, t1, dt = float(grid[0]), float(grid[-1]), float(grid[1] - grid[0])
    ends: List[int] = []
    for k in range(m + 1, MAX_HALVINGS + 1):
        t_c = _candidate_time(gamma, float(grid[left]), t1, monotone, k)
        e = min(max(int(round((t_c - t0) / dt)), left + 1), end)
        if e < end and (not ends or e < ends[-1]):
            ends.append(e)
        if e == left + 1:
            break
    return ends


def refine_breaking_points(
    gamma: EnvelopeCurve,
    interval: tuple[float, float],
    a: float,
    b: float,
    alpha: float,
    rho_start: float,
    dt: Optional[float] = None,
    tol: Optional[float] = None,
    max_points: Optional[int] = None,
    first_mu: Optional[float] = None,
    slope_window: Optional[float] = None,
) -> Refinement:
    """Split [t_j, t_{j+1}] until the simulated rho stays within tol of gamma.

    Each subinterval starts from the end value of the previous one and takes
    mu from tune_mu on the envelope slope at its left end (or ``first_mu`` for
    the first subinterval). A failing subinterval is shortened to the time where
    gamma has covered 1/2^m of its remaining change, with the smallest m that
    passes. When the accepted end carries rho further from gamma than
    ``OFFSET_SHARE * tol`` past the offset it started with, the breaking point
    moves to the longest shorter halving that does not.
    """
    dt = 1.0 / get_default_sample_rate() if dt is None else dt
    tol = get_fit_tolerance() if tol is None else tol
    max_points = get_max_breaking_points() if max_points is None else max_points
    slope_window = get_slope_window() if slope_window is None else slope_window

    t0, t1 = interval
    n_grid = max(int(round((t1 - t0) / dt)), 1)
    grid = t0 + dt * np.arange(n_grid + 1)
    grid[-1] = t1
    reference = np.asarray(gamma(grid), dtype=np.float64)

    points: List[float] = []
    mus: List[float] = []
    left, rho_left, max_error = 0, float(rho_start), 0.0

    while True:
        t_left = float(grid[left])
        if first_mu is not None and not mus:
            mu = first_mu
        else:
            window = min(slope_window, 0.5 * (t1 - t_left))
            mu = tune_mu(rho_left, envelope_slope(gamma, t_left, window), a, b, alpha)

        segment = np.diff(reference[left:])
        monotone = bool(np.all(segment >= 0) or np.all(segment <= 0))

        accepted: Optional[tuple[int, int, np.ndarray]] = None
        fail_at = n_grid + 1
        tried: set[int] = set()
        for m in range(MAX_HALVINGS + 1):
            if m == 0:
                end = n_grid
            else:
                t_c = _candidate_time(gamma, t_left, t1, monotone, m)
                end = int(round((t_c - t0) / dt))
            end = min(max(end, left + 1), n_grid)
            if end in tried or end >= fail_at:
                if end == left + 1 and end >= fail_at:
                    break
                continue
            tried.add(end)
            path, bad = rk4_path(
                rho_left,
                mu,
                a,
                b,
                alpha,
                dt,
                end - left,
                t0=t_left,
                reference=reference[left : end + 1],
                tol=tol,
            )
            if bad is None:
                accepted = (m, end, path)
                break
            fail_at = min(fail_at, left + bad)
            if end == left + 1:
                break

        if accepted is None:
            raise RefinementError(interval, len(points), at=t_left)

        m, end, path = accepted
        offset = np.abs(path - reference[left : end + 1])
        budget = offset[0] + OFFSET_SHARE * tol
        if offset[-1] > budget:
            within = [e for e in _shorter_ends(gamma, grid, left, end, monotone, m) if offset[e - left] <= budget]
            if within:
                end = within[0]
                path = path[: end - left + 1]
                offset = offset[: end - left + 1]

        max_error = max(max_error, float(np.max(offset)))
        mus.append(float(mu))
        rho_left = float(path[-1])
        if end == n_grid:
            break
        points.append(float(grid[end]))
        log.debug("breaking point %.5f s (mu=%.4f)", grid[end], mu)
        if len(points) > max_points:
            raise RefinementError(interval, max_points)
        left = end

    return Refinement(points=points, mus=mus, rho_end=rho_left, max_error=max_error)


def initial_state(spectral: SpectralVector, rho0: float) -> tuple[List[float], List[float]]:
    """Leaf-consistent initial state: x0_i = (d_i / d_1) x0_1, x0_1 = rho0 / S, y0 = 0."""
    x1 = rho0 / spectral.rho_sum
    x0 = [float(ratio * x1) for ratio in spectral.ratios]
    return x0, [0.0] * len(x0)


def reduce_to_scalar(model: ControllerModel) -> tuple[float, float, float]:
    """(rho0, a S^2, b S^4): initial value and g-coefficients of the on-leaf equation."""
    r1 = float(np.hypot(model.x0[1], model.y0[1]))
    a_eff, b_eff = model.g_coefficients
    return model.spectral.rho_sum * r1, a_eff, b_eff


def build_model(
    spectral: SpectralVector,
    gamma: EnvelopeCurve,
    plan: SegmentPlan,
    epsilon: Optional[float] = None,
    rho0: Optional[float] = None,
    mu0: Optional[float] = None,
    dt: Optional[float] = None,
    tol: Optional[float] = None,
    slope_window: Optional[float] = None,
    constants: Optional[tuple[float, int, float]] = None,
) -> ControllerModel:
    """Fit constants, the full mu schedule and the initial state for one note.

    Breaking points already present in ``plan`` are kept as switches and the
    refinement adds its own between them. Known ``constants`` (alpha, a, b)
    skip the sustain fit.
    """
    dt = 1.0 / get_default_sample_rate() if dt is None else dt

    sustain_fit: Optional[SustainFit] = None
    sustain_index: Optional[int] = None
    if constants is None:
        for i, (label, interval) in enumerate(zip(plan.labels, plan.intervals)):
            if label == "sustain" and sustain_has_two_steady_states(gamma, interval):
                sustain_fit = fit_sustain_constants(gamma, interval, epsilon)
                sustain_index = i
                break

    if constants is not None:
        alpha, a, b = constants
    elif sustain_fit is not None:
        alpha, a, b = sustain_fit.alpha, sustain_fit.a, sustain_fit.b
    else:
        alpha, a, b = default_constants()

    mu0_bound, rho0_bound = delay_init(b)
    rho0 = rho0 if rho0 is not None else get_rho0_override()
    rho0 = rho0 if rho0 is not None else min(rho0_bound, RHO0_CEILING)
    mu0 = mu0 if mu0 is not None else get_mu0_override()
    mu0 = mu0 if mu0 is not None else mu0_bound

    cap = get_max_breaking_points()
    steps: List[MuStep] = []
    breaking_points: List[List[float]] = []
    rho = rho0
    for i, (label, interval) in enumerate(zip(plan.labels, plan.intervals)):
        first_mu = None
        if label == "delay":
            first_mu = mu0
        elif i == sustain_index and sustain_fit is not None:
            first_mu = sustain_fit.mu

        # given breaking points are kept; each piece between them is refined on its own
        cuts = [interval[0], *plan.breaking_points[i], interval[1]]
        points: List[float] = []
        max_error = 0.0
        for k, piece in enumerate(zip(cuts, cuts[1:])):
            result = refine_breaking_points(
                gamma,
                piece,
                a,
                b,
                alpha,
                rho,
                dt=dt,
                tol=tol,
                max_points=cap - len(points),
                first_mu=first_mu if k == 0 else None,
                slope_window=slope_window,
            )
            if k > 0:
                points.append(piece[0])
            times = [piece[0]] + result.points
            steps.extend(MuStep(t=t, mu=mu) for t, mu in zip(times, result.mus))
            points.extend(result.points)
            max_error = max(max_error, result.max_error)
            rho = result.rho_end
        if len(points) > cap:
            raise RefinementError(interval, cap)
        breaking_points.append(points)
        log.info(
            "%s [%.4f, %.4f]: %d breaking points, max |rho-gamma| = %.4f",
            label,
            interval[0],
            interval[1],
            len(points),
            max_error,
        )

    x0, y0 = initial_state(spectral, rho0)
    fitted_plan = SegmentPlan(
        borders=plan.borders, labels=plan.labels, breaking_points=breaking_points
    )
    model = ControllerModel(
        n=spectral.n,
        spectral=spectral,
        a=a,
        b=b,
        alpha=alpha,
        schedule=MuSchedule(steps=steps),
        plan=fitted_plan,
        rho0=rho0,
        x0=x0,
        y0=y0,
        duration=plan.borders[-1],
    )
    log.info("✅ model fitted: %d schedule steps, (alpha, a, b) = (%g, %d, %g)", len(steps), alpha, a, b)
    return model
