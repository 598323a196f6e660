"""Fixed-step integration of the scalar amplitude equation and the full Eulerian system.

Scalar:  rho' = alpha rho (mu(t) + a rho^2 + b rho^4)
Full:    x_i' = -omega_i y_i + f x_i,   y_i' = omega_i x_i + f y_i,
         f = alpha (mu(t) + a S^2 (x_1^2 + y_1^2) + b S^4 (x_1^2 + y_1^2)^2),  S = sum d_i / d_1

Both use classical RK4 on a uniform grid. Schedule switches are snapped to the
grid and mu is held at its value at the base time of each step.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from src.config import get_blowup_guard, get_default_sample_rate
from src.errors import BlowUpError
from src.models import ControllerModel, MuSchedule, ScalarSeries, SpectralVector, Trajectory

log = logging.getLogger(__name__)


def scalar_rhs(rho: float, mu: float, a: float, b: float, alpha: float) -> float:
    r2 = rho * rho
    return alpha * rho * (mu + a * r2 + b * r2 * r2)


def rk4_path(
    rho0: float,
    mu: np.ndarray | float,
    a: float,
    b: float,
    alpha: float,
    dt: float,
    n_steps: int,
    t0: float = 0.0,
    guard: Optional[float] = None,
    reference: Optional[np.ndarray] = None,
    tol: Optional[float] = None,
) -> tuple[np.ndarray, Optional[int]]:
    """RK4 path of the scalar equation over ``n_steps`` steps.

    ``mu`` is a scalar or one value per step. When ``reference`` and ``tol`` are
    given the integration stops at the first grid index k with
    |rho_k - reference_k| >= tol; the truncated path and k are returned.
    """
    guard = get_blowup_guard() if guard is None else guard
    mus = np.broadcast_to(np.asarray(mu, dtype=np.float64), (n_steps,))
    path = np.empty(n_steps + 1)
    path[0] = rho = float(rho0)
    h = float(dt)
    half = 0.5 * h
    a, b, alpha = float(a), float(b), float(alpha)

    if reference is not None and tol is not None and abs(rho - reference[0]) >= tol:
        return path[:1], 0

    for k in range(n_steps):
        m = float(mus[k])
        r2 = rho * rho
        k1 = alpha * rho * (m + a * r2 + b * r2 * r2)
        p = rho + half * k1
        r2 = p * p
        k2 = alpha * p * (m + a * r2 + b * r2 * r2)
        p = rho + half * k2
        r2 = p * p
        k3 = alpha * p * (m + a * r2 + b * r2 * r2)
        p = rho + h * k3
        r2 = p * p
        k4 = alpha * p * (m + a * r2 + b * r2 * r2)
        rho = rho + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0

        if not np.isfinite(rho) or abs(rho) > guard:
            raise BlowUpError(t0 + (k + 1) * h, rho)
        path[k + 1] = rho
        if reference is not None and tol is not None and abs(rho - reference[k + 1]) >= tol:
            return path[: k + 2], k + 1

    return path, None


def time_grid(t_span: tuple[float, float], dt: float) -> np.ndarray:
    t0, t1 = t_span
    n_steps = int(round((t1 - t0) / dt))
    return t0 + dt * np.arange(n_steps + 1)


def mu_on_grid(schedule: MuSchedule, times: np.ndarray, dt: float) -> np.ndarray:
    """Right-continuous mu at every grid point with switches snapped to the grid."""
    t0 = float(times[0])
    switch_index = np.round((np.asarray(schedule.switch_times) - t0) / dt).astype(np.int64)
    values = np.asarray(schedule.values, dtype=np.float64)
    k = np.arange(times.size)
    position = np.searchsorted(switch_index, k, side="right") - 1
    return values[np.clip(position, 0, None)]


def integrate_scalar(
    rho0: float,
    schedule: MuSchedule,
    a: float,
    b: float,
    alpha: float,
    t_span: tuple[float, float],
    dt: float,
    guard: Optional[float] = None,
) -> ScalarSeries:
    if dt <= 0:
        raise ValueError("dt must be positive")
    times = time_grid(t_span, dt)
    mu = mu_on_grid(schedule, times, dt)
    rho, _ = rk4_path(rho0, mu[:-1], a, b, alpha, dt, times.size - 1, t0=times[0], guard=guard)
    return ScalarSeries(times=times, rho=rho, mu=mu)


def _rk4_corotating(
    u0: np.ndarray,
    mu: np.ndarray,
    a_eff: float,
    b_eff: float,
    alpha: float,
    dt: float,
    guard: float,
    t0: float,
) -> np.ndarray:
    """RK4 for u' = f(u) u, the full system seen from the frame rotating with omega.

    The rotation part is linear and f only depends on |u_1| = |z_1|, so
    z(t) = exp(i omega t) u(t) solves the full system exactly when u does.
    """
    n_steps = mu.size
    out = np.empty((n_steps + 1, u0.size), dtype=np.complex128)
    out[0] = u = u0.astype(np.complex128)
    h = dt
    half = 0.5 * dt

    def field(v: np.ndarray, m: float) -> np.ndarray:
        q = v[1].real ** 2 + v[1].imag ** 2
        return alpha * (m + a_eff * q + b_eff * q * q) * v

    for k in range(n_steps):
        m = float(mu[k])
        k1 = field(u, m)
        k2 = field(u + half * k1, m)
        k3 = field(u + half * k2, m)
        k4 = field(u + h * k3, m)
        u = u + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        peak = float(np.max(np.abs(u)))
        if not np.isfinite(peak) or peak > guard:
            raise BlowUpError(t0 + (k + 1) * h, peak)
        out[k + 1] = u
    return out


def integrate_full(
    model: ControllerModel,
    t_span: Optional[tuple[float, float]] = None,
    dt: Optional[float] = None,
    guard: Optional[float] = None,
) -> Trajectory:
    """Integrate all 2(n+1) Cartesian coordinates of the Eulerian system."""
    t_span = t_span if t_span is not None else (0.0, model.duration)
    dt = dt if dt is not None else 1.0 / get_default_sample_rate()
    guard = get_blowup_guard() if guard is None else guard

    times = time_grid(t_span, dt)
    mu = mu_on_grid(model.schedule, times, dt)
    omega = np.asarray(model.spectral.omega, dtype=np.float64)
    a_eff, b_eff = model.g_coefficients

    z0 = np.asarray(model.x0, dtype=np.float64) + 1j * np.asarray(model.y0, dtype=np.float64)
    u0 = z0 * np.exp(-1j * omega * times[0])
    u = _rk4_corotating(u0, mu[:-1], a_eff, b_eff, model.alpha, dt, guard, times[0])

    phase = np.outer(times, omega)
    z = u * np.exp(1j * phase)
    theta0 = np.angle(z0)
    log.info("full integration: %d steps, %d coordinates", times.size - 1, 2 * omega.size)
    return Trajectory(
        times=times,
        r=np.abs(z),
        theta=phase + theta0,
        mu=mu,
        x=z.real,
        y=z.imag,
    )


def trajectory_from_scalar(
    series: ScalarSeries, spectral: SpectralVector, theta0: Optional[np.ndarray] = None
) -> Trajectory:
    """Fast path: amplitudes on the leaf from rho, phases analytic."""
    r1 = np.asarray(series.rho) / spectral.rho_sum
    omega = np.asarray(spectral.omega)
    theta0 = np.zeros_like(omega) if theta0 is None else np.asarray(theta0)
    return Trajectory(
        times=series.times,
        r=np.abs(reconstruct_amplitudes(r1, spectral)),
        theta=np.outer(series.times, omega) + theta0,
        mu=series.mu,
    )


def reconstruct_amplitudes(r1_series: np.ndarray, spectral: SpectralVector) -> np.ndarray:
    """r_i(t) = (c_i / c_1) r_1(t) for every partial; rows are times."""
    c = spectral.c
    if c[1] == 0:
        raise ValueError("c_1 must be nonzero")
    return np.outer(np.asarray(r1_series, dtype=np.float64), c / c[1])


def compute_xi(trajectory: Trajectory, model: ControllerModel) -> np.ndarray:
    """xi(t) = exp(int_0^t f) by the trapezoid rule, mu held per step."""
    a_eff, b_eff = model.g_coefficients
    q = np.asarray(trajectory.r)[:, 1] ** 2
    g = a_eff * q + b_eff * q * q
    mu = np.asarray(trajectory.mu)
    dt = trajectory.dt
    left = model.alpha * (mu[:-1] + g[:-1])
    right = model.alpha * (mu[:-1] + g[1:])
    integral = np.concatenate(([0.0], np.cumsum(0.5 * dt * (left + right))))
    return np.exp(integral)


def leaf_residual(trajectory: Trajectory, spectral: SpectralVector) -> float:
    """max over i, j, t of |c_j r_i(t) - c_i r_j(t)| with c taken by magnitude."""
    r = np.asarray(trajectory.r, dtype=np.float64)
    c = np.abs(spectral.c)
    residual = 0.0
    for j in range(c.size):
        diff = np.abs(r * c[j] - np.outer(r[:, j], c))
        residual = max(residual, float(np.max(diff)))
    return residual


def leaf_scale(trajectory: Trajectory, spectral: SpectralVector) -> float:
    """max |c_i r_j| over the trajectory, the scale for relative leaf residuals."""
    r = np.asarray(trajectory.r, dtype=np.float64)
    return float(np.max(np.abs(spectral.c)) * np.max(np.abs(r)))


def relative_leaf_residual(trajectory: Trajectory, spectral: SpectralVector) -> float:
    scale = leaf_scale(trajectory, spectral)
    return leaf_residual(trajectory, spectral) / scale if scale > 0 else 0.0
