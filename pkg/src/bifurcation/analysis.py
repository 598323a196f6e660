"""Equilibria, transition varieties and bifurcation events of rho' = alpha rho (mu + a rho^2 + b rho^4)."""

from __future__ import annotations

import logging
import math
from typing import List, Optional

import numpy as np

from src.models import (
    BifurcationEvent,
    Equilibrium,
    EquilibriumSet,
    EventKind,
    HysteresisReport,
    IntervalInventory,
    MuSchedule,
    SegmentPlan,
    SpectralVector,
    Stability,
    TorusInfo,
    TransitionVarieties,
)

log = logging.getLogger(__name__)

DEGENERATE_SLOPE = 1e-8


def _stability(derivative: float) -> Stability:
    if abs(derivative) < DEGENERATE_SLOPE:
        return "degenerate"
    return "stable" if derivative < 0 else "unstable"


def _polish(s: float, mu: float, a: float, b: float) -> float:
    """One Newton step on b s^2 + a s + mu = 0."""
    slope = 2 * b * s + a
    if slope == 0:
        return s
    return s - (b * s * s + a * s + mu) / slope


def _squared_roots(mu: float, a: float, b: float) -> List[float]:
    """Positive roots s = rho^2 of mu + a s + b s^2."""
    if b == 0:
        if a == 0:
            return []
        s = -mu / a
        return [s] if s > 0 else []

    disc = a * a - 4 * b * mu
    if disc < 0:
        return []
    root = math.sqrt(disc)
    if a == 0:
        candidates = [root / (2 * b), -root / (2 * b)]
    else:
        q = -0.5 * (a + math.copysign(root, a))
        candidates = [q / b, mu / q] if q != 0 else [-a / (2 * b)]
    roots = sorted({_polish(s, mu, a, b) for s in candidates if s > 0})
    return roots


def equilibria(mu: float, a: float, b: float, alpha: float = 1.0) -> EquilibriumSet:
    """Nonnegative equilibria (origin included) with their stability."""
    rhos = [0.0] + [math.sqrt(s) for s in _squared_roots(mu, a, b)]
    roots = []
    for rho in rhos:
        r2 = rho * rho
        derivative = alpha * (mu + 3 * a * r2 + 5 * b * r2 * r2)
        roots.append(Equilibrium(rho=rho, stability=_stability(derivative), derivative=derivative))
    return EquilibriumSet(mu=mu, a=a, b=b, alpha=alpha, roots=roots)


def count_positive_roots_on_grid(
    mu: float, a: float, b: float, points: int = 100_001
) -> int:
    """Brute-force count of positive roots of mu + a rho^2 + b rho^4 by sign changes."""
    if b != 0:
        s_max = 1.0 + max(abs(a), abs(mu)) / abs(b)
    elif a != 0:
        s_max = 1.0 + abs(mu / a)
    else:
        return 0
    s = np.linspace(0.0, s_max, points)[1:]
    values = mu + a * s + b * s * s
    signs = np.sign(values)
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def transition_varieties(a: float, b: float, p: int = 1, q: int = 2) -> TransitionVarieties:
    """Pitchfork at mu = 0 and, when a b < 0, the double saddle-node (mu*, rho*)."""
    kind: EventKind
    if a < 0:
        kind = "supercritical-pitchfork"
    elif a > 0:
        kind = "subcritical-pitchfork"
    else:
        kind = "none"

    if b == 0 or a * b >= 0 or q <= p:
        return TransitionVarieties(pitchfork_kind=kind)

    base = -p * a / (q * b)
    mu_star = -a * base ** (p / (q - p)) * ((q - p) / q)
    rho_star = base ** (1.0 / (2 * (q - p)))
    return TransitionVarieties(pitchfork_kind=kind, double_sn_mu=mu_star, double_sn_rho=rho_star)


def torus_inventory(
    mu: float,
    a: float,
    b: float,
    spectral: SpectralVector,
    alpha: float = 1.0,
) -> List[TorusInfo]:
    """One invariant torus per positive root, radii (r_1* / |c_1|) |c|."""
    c = np.abs(spectral.c)
    dimension = len(spectral.omega) - sum(1 for w in spectral.omega if w == 0)
    tori = []
    for root in equilibria(mu, a, b, alpha).positive:
        r1 = root.rho / spectral.rho_sum
        tori.append(
            TorusInfo(
                rho=root.rho,
                radii=(r1 / c[1] * c).tolist(),
                dimension=dimension,
                stability=root.stability,
            )
        )
    return tori


def _radii(mu: float, a: float, b: float, alpha: float, spectral: Optional[SpectralVector]) -> List[List[float]]:
    if spectral is None:
        return [[root.rho] for root in equilibria(mu, a, b, alpha).positive]
    return [torus.radii for torus in torus_inventory(mu, a, b, spectral, alpha)]


def _crossed(value: float, mu_before: float, mu_after: float) -> bool:
    low, high = min(mu_before, mu_after), max(mu_before, mu_after)
    return low < value <= high


def classify_events(
    schedule: MuSchedule,
    a: float,
    b: float,
    alpha: float = 1.0,
    spectral: Optional[SpectralVector] = None,
) -> List[BifurcationEvent]:
    """Bifurcation events at every schedule switch that crosses a transition variety."""
    varieties = transition_varieties(a, b)
    events: List[BifurcationEvent] = []
    for previous, step in zip(schedule.steps, schedule.steps[1:]):
        mu_before, mu_after = previous.mu, step.mu
        crossings: List[tuple[float, EventKind]] = []
        if varieties.pitchfork_kind != "none" and _crossed(0.0, mu_before, mu_after):
            crossings.append((0.0, varieties.pitchfork_kind))
        if varieties.double_sn_mu is not None and _crossed(varieties.double_sn_mu, mu_before, mu_after):
            crossings.append((varieties.double_sn_mu, "double-saddle-node"))
        if not crossings:
            continue

        crossings.sort(key=lambda item: item[0], reverse=mu_after < mu_before)
        before = len(equilibria(mu_before, a, b, alpha).positive)
        after = len(equilibria(mu_after, a, b, alpha).positive)
        radii = _radii(mu_after, a, b, alpha, spectral)
        for _, kind in crossings:
            events.append(
                BifurcationEvent(
                    time=step.t,
                    kind=kind,
                    mu_before=mu_before,
                    mu_after=mu_after,
                    tori_before=before,
                    tori_after=after,
                    torus_radii=radii,
                )
            )
    log.info("%d bifurcation events over %d switches", len(events), len(schedule.steps) - 1)
    return events


def detect_hysteresis(schedule: MuSchedule, a: float, b: float) -> HysteresisReport:
    """An up-crossing of 0 followed later by a down-crossing of mu* closes a cycle."""
    if not (a > 0 and b < 0):
        return HysteresisReport(found=False)
    mu_star = transition_varieties(a, b).double_sn_mu
    if mu_star is None:
        return HysteresisReport(found=False)

    t_up: Optional[float] = None
    for previous, step in zip(schedule.steps, schedule.steps[1:]):
        rising = step.mu > previous.mu
        if t_up is None and rising and _crossed(0.0, previous.mu, step.mu):
            t_up = step.t
        elif t_up is not None and not rising and _crossed(mu_star, previous.mu, step.mu):
            return HysteresisReport(found=True, t_up=t_up, t_down=step.t)
    return HysteresisReport(found=False, t_up=t_up)


def interval_inventories(
    schedule: MuSchedule,
    a: float,
    b: float,
    alpha: float,
    spectral: SpectralVector,
    t_end: float,
    plan: Optional[SegmentPlan] = None,
) -> List[IntervalInventory]:
    """Torus inventory on every constant-mu interval of the schedule."""
    inventories = []
    times = schedule.switch_times + [t_end]
    for step, t_next in zip(schedule.steps, times[1:]):
        label = None
        if plan is not None:
            for kind, (left, right) in zip(plan.labels, plan.intervals):
                if left <= step.t < right:
                    label = kind
                    break
        origin = equilibria(step.mu, a, b, alpha).roots[0]
        inventories.append(
            IntervalInventory(
                t_start=step.t,
                t_end=t_next,
                mu=step.mu,
                label=label,
                origin_stability=origin.stability,
                tori=torus_inventory(step.mu, a, b, spectral, alpha),
            )
        )
    return inventories
