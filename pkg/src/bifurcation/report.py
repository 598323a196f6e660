"""Human-readable and JSON bifurcation reports."""

from __future__ import annotations

from typing import List, Optional

from src.bifurcation.analysis import classify_events, detect_hysteresis, interval_inventories
from src.models import (
    BifurcationEvent,
    BifurcationReport,
    ControllerModel,
    IntervalInventory,
)

_NUMBERS = {1: "one", 2: "two", 3: "three", 4: "four"}


def _describe(inventory: IntervalInventory) -> str:
    tori = inventory.tori
    origin = f"origin {inventory.origin_stability}"
    if not tori:
        return f"no hypertorus, {origin}"
    dim = tori[0].dimension
    if len(tori) == 1:
        return f"one {tori[0].stability} T{dim}, {origin}"
    if len(tori) == 2:
        inner, outer = sorted(tori, key=lambda t: t.rho)
        return f"two T{dim} (inner {inner.stability}, outer {outer.stability}), {origin}"
    stabilities = ", ".join(t.stability for t in sorted(tori, key=lambda t: t.rho))
    return f"{_NUMBERS.get(len(tori), len(tori))} T{dim} ({stabilities}), {origin}"


def narrate(events: List[BifurcationEvent], inventories: List[IntervalInventory]) -> List[str]:
    lines = []
    for inventory in inventories:
        name = inventory.label or "interval"
        lines.append(
            f"{name} ({inventory.t_start:.4f}, {inventory.t_end:.4f}) s, "
            f"mu={inventory.mu:.6g}: {_describe(inventory)}"
        )
    if not events:
        lines.append("no qualitative change")
        return lines
    for event in events:
        lines.append(
            f"t={event.time:.4f} s: {event.kind.replace('-', ' ')} "
            f"(mu {event.mu_before:.6g} -> {event.mu_after:.6g}, "
            f"tori {event.tori_before} -> {event.tori_after})"
        )
    return lines


def bifurcation_report(model: ControllerModel, notes: Optional[List[str]] = None) -> BifurcationReport:
    events = classify_events(model.schedule, model.a, model.b, model.alpha, model.spectral)
    inventories = interval_inventories(
        model.schedule,
        model.a,
        model.b,
        model.alpha,
        model.spectral,
        t_end=model.duration,
        plan=model.plan,
    )
    return BifurcationReport(
        events=events,
        inventories=inventories,
        hysteresis=detect_hysteresis(model.schedule, model.a, model.b),
        lines=narrate(events, inventories),
        notes=notes or [],
    )
