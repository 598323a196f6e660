"""Tests for equilibria, transition varieties and events."""

import numpy as np
import pytest

from src.bifurcation.analysis import (
    classify_events,
    count_positive_roots_on_grid,
    detect_hysteresis,
    equilibria,
    interval_inventories,
    torus_inventory,
    transition_varieties,
)
from src.data.reference_notes import PIANO, VIOLIN
from src.models import MuSchedule


class TestEquilibria:
    """Roots of mu + a rho^2 + b rho^4 and their stability."""

    def test_violin_sustain_pair(self):
        result = equilibria(-0.072, 1, -2.15)

        assert [root.rho for root in result.roots] == pytest.approx([0.0, 0.29841, 0.61325], abs=1e-5)
        assert [root.stability for root in result.roots] == ["stable", "unstable", "stable"]

    def test_supercritical_branch(self):
        result = equilibria(0.25, -1, 0.0)
        assert [root.rho for root in result.positive] == pytest.approx([0.5])
        assert result.positive[0].stability == "stable"
        assert result.roots[0].stability == "unstable"

    def test_no_positive_roots(self):
        assert equilibria(-1.0, -1, 0.0).positive == []

    def test_degenerate_origin(self):
        assert equilibria(0.0, -1, 0.0).roots[0].stability == "degenerate"

    def test_alpha_scales_derivative(self):
        slow = equilibria(-0.072, 1, -2.15, alpha=1.0)
        fast = equilibria(-0.072, 1, -2.15, alpha=23.0)
        for s, f in zip(slow.roots, fast.roots):
            assert f.derivative == pytest.approx(23.0 * s.derivative)

    def test_negative_alpha_flips_stability(self):
        result = equilibria(-0.072, 1, -2.15, alpha=-1.0)
        assert [root.stability for root in result.roots] == ["unstable", "stable", "unstable"]

    def test_roots_solve_the_quartic(self):
        for root in equilibria(0.3, 1, -0.7).positive:
            s = root.rho**2
            assert 0.3 + s - 0.7 * s * s == pytest.approx(0.0, abs=1e-12)

    def test_matches_brute_force_count(self):
        """Analytic root counts agree with sign changes on a fine grid."""
        rng = np.random.default_rng(0)
        checked = 0
        for _ in range(1000):
            mu = rng.uniform(-2.0, 2.0)
            a = float(rng.choice([-1, 1]))
            b = rng.uniform(-3.0, 3.0)
            # near-tangent and near-origin roots fall between grid points
            if abs(a * a - 4 * b * mu) < 1e-2 or abs(mu) < 1e-2 or abs(b) < 1e-2:
                continue
            assert len(equilibria(mu, a, b).positive) == count_positive_roots_on_grid(mu, a, b)
            checked += 1
        assert checked > 900


class TestTransitionVarieties:
    def test_violin_double_saddle_node(self):
        varieties = transition_varieties(1, -2.15)

        assert varieties.pitchfork_kind == "subcritical-pitchfork"
        assert varieties.double_sn_mu == pytest.approx(-0.116279, abs=1e-6)
        assert varieties.double_sn_rho == pytest.approx(0.48224, abs=1e-5)

    def test_double_root_at_the_variety(self):
        varieties = transition_varieties(1, -2.15)
        roots = equilibria(varieties.double_sn_mu + 1e-9, 1, -2.15).positive
        assert len(roots) == 2
        assert [r.rho for r in roots] == pytest.approx([varieties.double_sn_rho] * 2, abs=1e-3)

    @pytest.mark.parametrize(
        "a,b,kind",
        [(-1, 0.0, "supercritical-pitchfork"), (-1, -1.0, "supercritical-pitchfork"), (0, 0.0, "none")],
    )
    def test_without_double_saddle_node(self, a, b, kind):
        varieties = transition_varieties(a, b)
        assert varieties.pitchfork_kind == kind
        assert varieties.double_sn_mu is None

    def test_supercritical_with_restabilizing_term(self):
        varieties = transition_varieties(-1, 2.0)
        assert varieties.double_sn_mu == pytest.approx(0.125)
        assert varieties.double_sn_rho == pytest.approx(0.5)


class TestEvents:
    """Events along the reference schedules."""

    def test_piano_pitchforks(self):
        schedule = MuSchedule.from_pairs(PIANO.switch_times, PIANO.mus)

        events = classify_events(schedule, PIANO.a, PIANO.b, PIANO.alpha, PIANO.spectral)

        assert [e.time for e in events] == [0.084, 0.112, 0.16, 0.293]
        assert {e.kind for e in events} == {"supercritical-pitchfork"}
        assert (events[0].tori_before, events[0].tori_after) == (0, 1)
        assert (events[1].tori_before, events[1].tori_after) == (1, 0)

    def test_piano_breaking_points_keep_the_phase_portrait(self):
        schedule = MuSchedule.from_pairs(PIANO.switch_times, PIANO.mus)
        times = {e.time for e in classify_events(schedule, PIANO.a, PIANO.b)}
        for points in PIANO.breaking_points:
            assert times.isdisjoint(points)

    def test_violin_events(self):
        schedule = MuSchedule.from_pairs(VIOLIN.switch_times, VIOLIN.mus)

        events = classify_events(schedule, VIOLIN.a, VIOLIN.b, VIOLIN.alpha, VIOLIN.spectral)

        assert [(e.time, e.kind) for e in events] == [
            (0.345, "subcritical-pitchfork"),
            (0.5717, "subcritical-pitchfork"),
            (2.107, "double-saddle-node"),
        ]
        assert events[1].tori_after == 2
        assert len(events[1].torus_radii) == 2
        assert events[2].tori_after == 0

    def test_event_radii_lie_on_the_leaf(self):
        schedule = MuSchedule.from_pairs(VIOLIN.switch_times, VIOLIN.mus)
        event = classify_events(schedule, VIOLIN.a, VIOLIN.b, VIOLIN.alpha, VIOLIN.spectral)[1]
        ratios = np.asarray(event.torus_radii[0]) / event.torus_radii[0][1]
        np.testing.assert_allclose(ratios, np.abs(VIOLIN.spectral.ratios))

    def test_violin_hysteresis(self):
        schedule = MuSchedule.from_pairs(VIOLIN.switch_times, VIOLIN.mus)
        report = detect_hysteresis(schedule, VIOLIN.a, VIOLIN.b)
        assert report.found
        assert (report.t_up, report.t_down) == (0.345, 2.107)

    def test_piano_has_no_hysteresis(self):
        schedule = MuSchedule.from_pairs(PIANO.switch_times, PIANO.mus)
        assert not detect_hysteresis(schedule, PIANO.a, PIANO.b).found

    def test_up_crossing_without_return(self):
        schedule = MuSchedule.from_pairs([0.0, 0.1, 0.2], [-0.1, 1.0, -0.05])
        report = detect_hysteresis(schedule, 1, -2.15)
        assert not report.found
        assert report.t_up == 0.1


class TestInventories:
    def test_torus_dimension_and_radii(self):
        tori = torus_inventory(-0.072, 1, -2.15, VIOLIN.spectral)
        assert [t.dimension for t in tori] == [6, 6]
        outer = tori[1]
        assert outer.radii[1] == pytest.approx(outer.rho / VIOLIN.spectral.rho_sum)

    def test_violin_intervals_are_labelled(self, violin_model):
        inventories = interval_inventories(
            violin_model.schedule,
            violin_model.a,
            violin_model.b,
            violin_model.alpha,
            violin_model.spectral,
            t_end=violin_model.duration,
            plan=violin_model.plan,
        )

        assert [i.label for i in inventories] == [
            "delay",
            "attack",
            "attack",
            "sustain",
            "release",
            "release",
        ]
        assert inventories[-1].t_end == 2.5
        sustain = inventories[3]
        assert len(sustain.tori) == 2
        assert sustain.origin_stability == "stable"
