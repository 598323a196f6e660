"""Tests for fitting constants and the mu schedule."""

import numpy as np
import pytest

from src.analysis.envelope import segment_envelope
from src.control.controller import (
    build_model,
    default_constants,
    delay_init,
    envelope_slope,
    fit_sustain_constants,
    initial_state,
    reduce_to_scalar,
    refine_breaking_points,
    tune_mu,
)
from src.bifurcation.analysis import classify_events
from src.data.reference_notes import PIANO, VIOLIN, reference_model
from src.dynamics.oracles import closed_form_cubic
from src.errors import FitInfeasibleError, RefinementError, SingularSystemError
from src.models import EnvelopeCurve, SegmentPlan
from src.synthesis.additive import simulate_model


def curve_on(times, values, t_end=None):
    return EnvelopeCurve(knot_times=list(times), knot_values=list(values), t_end=t_end)


def millisecond_grid(t_end):
    return np.round(np.arange(0, int(round(t_end * 1000)) + 1) * 1e-3, 6)


class TestTuneMu:
    """mu from the amplitude and the envelope slope at a border."""

    @pytest.mark.parametrize(
        "rho,slope,expected",
        [
            (8.75e-4, 1.66, 1897.14),
            (0.720, -7.2, -9.4816),
            (0.2418, -0.78, -3.1674),
        ],
        ids=["piano-attack", "piano-decay", "piano-release"],
    )
    def test_piano_values(self, rho, slope, expected):
        """With alpha = 1, a = -1, b = 0 the piano segment values follow."""
        assert tune_mu(rho, slope, -1, 0.0, 1.0) == pytest.approx(expected, rel=1e-4)

    def test_piano_values_match_printed_schedule(self):
        assert tune_mu(8.75e-4, 1.66, -1, 0.0, 1.0) == pytest.approx(PIANO.mus[1], rel=5e-3)
        assert tune_mu(0.720, -7.2, -1, 0.0, 1.0) == pytest.approx(PIANO.mus[5], rel=2e-2)
        assert tune_mu(0.2418, -0.78, -1, 0.0, 1.0) == pytest.approx(PIANO.mus[8], rel=2e-2)

    @pytest.mark.parametrize(
        "rho,slope,expected",
        [(0.0045, 0.35, 3.36), (0.6132, -1.31, -0.165)],
        ids=["violin-attack", "violin-release"],
    )
    def test_violin_values(self, rho, slope, expected):
        assert tune_mu(rho, slope, 1, -2.15, 23.0) == pytest.approx(expected, rel=1e-2)

    def test_vanished_rho(self):
        with pytest.raises(FitInfeasibleError):
            tune_mu(0.0, 1.0, -1, 0.0, 1.0)

    def test_zero_alpha(self):
        with pytest.raises(ValueError):
            tune_mu(0.5, 1.0, -1, 0.0, 0.0)


class TestEnvelopeSlope:
    """Right-hand slope of the envelope from three samples."""

    @pytest.fixture
    def exponential(self):
        times = millisecond_grid(1.0)
        return curve_on(times, 0.1 * np.exp(2.0 * times))

    def test_exponential_growth(self, exponential):
        """The log-domain stencil is exact for gamma = 0.1 e^{2t}."""
        slope = envelope_slope(exponential, 0.4, 0.005)
        assert slope == pytest.approx(2.0 * float(exponential(0.4)), rel=1e-4)

    def test_straight_line(self):
        times = millisecond_grid(0.2)
        curve = curve_on(times, 0.1 + 2.0 * times)
        assert envelope_slope(curve, 0.05, 0.005) == pytest.approx(2.0, rel=1e-9)

    def test_silent_curve(self):
        times = millisecond_grid(0.5)
        curve = curve_on(times, np.zeros(times.size))
        assert envelope_slope(curve, 0.1, 0.005) == 0.0

    def test_backward_slope_at_the_end(self, exponential):
        slope = envelope_slope(exponential, 0.999, 0.005)
        assert slope == pytest.approx(2.0 * float(exponential(0.999)), rel=5e-3)

    def test_window_must_be_positive(self, exponential):
        with pytest.raises(ValueError):
            envelope_slope(exponential, 0.4, 0.0)



class TestSustainFit:
    """Constants from a sustain holding two steady states."""

    def test_recovers_violin_constants(self, violin_envelope):
        """The rendered violin sustain gives back b, mu and alpha."""
        fit = fit_sustain_constants(violin_envelope, (0.5717, 2.107), epsilon=0.03)

        assert fit.a == 1
        assert fit.b == pytest.approx(-2.14, abs=0.1)
        assert fit.mu == pytest.approx(-0.0734, abs=0.01)
        assert fit.alpha == pytest.approx(23.5, abs=2.0)
        assert fit.s1 == pytest.approx(float(violin_envelope(0.5717)) - 0.03)

    def test_default_epsilon(self, violin_envelope):
        """epsilon = 0.05 keeps b and mu but matches alpha lower on the rise."""
        fit = fit_sustain_constants(violin_envelope, (0.5717, 2.107))

        assert fit.s1 == pytest.approx(float(violin_envelope(0.5717)) - 0.05)
        assert fit.b == pytest.approx(-2.15, abs=0.1)
        assert fit.mu == pytest.approx(-0.072, abs=0.01)
        assert 20.0 < fit.alpha < 22.0

    def test_steady_states_are_equilibria(self, violin_envelope):
        fit = fit_sustain_constants(violin_envelope, (0.5717, 2.107), epsilon=0.03)
        for s in (fit.s1, fit.s2):
            assert fit.mu + fit.a * s**2 + fit.b * s**4 == pytest.approx(0.0, abs=1e-12)

    def test_falling_sustain_flips_signs(self):
        times = millisecond_grid(1.0)
        curve = curve_on(times, 0.8 - 0.4 * times)

        fit = fit_sustain_constants(curve, (0.0, 1.0), epsilon=0.05)

        assert fit.a == -1
        assert fit.b > 0
        assert fit.s1 == pytest.approx(0.85)

    def test_equal_levels(self):
        times = millisecond_grid(1.0)
        curve = curve_on(times, np.full(times.size, 0.5))
        with pytest.raises(SingularSystemError):
            fit_sustain_constants(curve, (0.0, 1.0), epsilon=0.03)

    def test_start_below_epsilon(self):
        times = millisecond_grid(1.0)
        curve = curve_on(times, 0.02 + 0.5 * times)
        with pytest.raises(FitInfeasibleError):
            fit_sustain_constants(curve, (0.0, 1.0), epsilon=0.03)

    @pytest.mark.parametrize("epsilon", [0.0, 0.06, -0.01])
    def test_epsilon_range(self, violin_envelope, epsilon):
        with pytest.raises(ValueError):
            fit_sustain_constants(violin_envelope, (0.5717, 2.107), epsilon=epsilon)


class TestRefinement:
    """Breaking points inside one border interval."""

    def test_exact_solution_needs_no_breaking_point(self):
        """gamma solving the equation itself is tracked by a single mu."""
        times = millisecond_grid(1.0)
        curve = curve_on(times, closed_form_cubic(0.5, 1.0, 1.0, times))

        result = refine_breaking_points(curve, (0.0, 1.0), -1, 0.0, 1.0, 0.5, dt=1e-4, tol=0.05)

        assert result.points == []
        assert result.mus == pytest.approx([1.0], abs=0.01)
        assert result.max_error < 0.01

    def test_linear_rise_is_split(self):
        times = millisecond_grid(0.2)
        curve = curve_on(times, 0.1 + 2.0 * times)

        result = refine_breaking_points(curve, (0.0, 0.2), -1, 0.0, 1.0, 0.1, dt=1e-4, tol=0.05)

        assert 1 <= len(result.points) <= 32
        assert len(result.mus) == len(result.points) + 1
        assert all(0.0 < p < 0.2 for p in result.points)
        assert result.points == sorted(result.points)
        assert result.max_error < 0.05
        assert result.rho_end == pytest.approx(0.5, abs=0.05)

    def test_breaking_point_cap(self):
        times = millisecond_grid(0.2)
        curve = curve_on(times, 0.1 + 2.0 * times)
        with pytest.raises(RefinementError) as exc:
            refine_breaking_points(
                curve, (0.0, 0.2), -1, 0.0, 1.0, 0.1, dt=1e-4, tol=0.05, max_points=0
            )
        assert exc.value.interval == (0.0, 0.2)
        assert exc.value.at is None
        assert "cap 0 exceeded" in str(exc.value)

    def test_failed_halving_names_the_subinterval(self):
        """rho starting outside the tolerance fails even a single step."""
        times = millisecond_grid(0.5)
        curve = curve_on(times, np.full(times.size, 0.5))

        with pytest.raises(RefinementError, match="no halving") as exc:
            refine_breaking_points(curve, (0.0, 0.5), -1, 0.0, 1.0, 0.1, dt=1e-4, tol=0.05)

        assert exc.value.at == 0.0
        assert exc.value.count == 0
        assert "cap" not in str(exc.value)

    def test_first_mu_is_used(self):
        times = millisecond_grid(0.5)
        curve = curve_on(times, np.zeros(times.size))

        result = refine_breaking_points(
            curve, (0.0, 0.5), -1, 0.0, 1.0, 0.01, dt=1e-4, tol=0.05, first_mu=-1.0
        )

        assert result.mus == [-1.0]
        assert result.rho_end == pytest.approx(0.01 * np.exp(-0.5), rel=1e-3)


class TestInitialState:
    """Leaf-consistent initial amplitudes."""

    def test_piano_printed_amplitudes(self):
        x0, y0 = initial_state(PIANO.spectral, PIANO.rho0)
        assert x0 == pytest.approx(PIANO.printed_x0, abs=1e-6)
        assert y0 == [0.0] * 7

    def test_violin_printed_ratios(self):
        x0, _ = initial_state(VIOLIN.spectral, VIOLIN.rho0)
        ratios = [x / x0[1] for x in x0]
        printed = [x / VIOLIN.printed_x0[1] for x in VIOLIN.printed_x0]
        assert ratios == pytest.approx(printed, abs=0.01)

    def test_reduce_to_scalar(self, violin_model):
        rho0, a_eff, b_eff = reduce_to_scalar(violin_model)
        s = VIOLIN.spectral.rho_sum
        assert rho0 == pytest.approx(VIOLIN.rho0)
        assert a_eff == pytest.approx(s**2)
        assert b_eff == pytest.approx(-2.15 * s**4)


class TestDelayInit:
    def test_without_quartic_term(self):
        assert delay_init(0.0) == (-1.0, 0.01)

    def test_violin_bounds(self):
        mu0, rho0 = delay_init(-2.15)
        assert mu0 == pytest.approx(-0.116279, abs=1e-6)
        assert rho0 == 0.01

    def test_default_constants(self):
        assert default_constants() == (1.0, -1, 0.0)


@pytest.mark.slow
class TestBuildModel:
    """Whole-note fits on synthetic envelopes."""

    def test_piano_shaped_envelope(self, piano_envelope):
        plan = segment_envelope(piano_envelope)
        model = build_model(PIANO.spectral, piano_envelope, plan, dt=1e-4)

        assert (model.alpha, model.a, model.b) == (1.0, -1, 0.0)
        assert model.schedule.steps[0].mu == -1.0
        assert model.rho0 == 0.01
        assert model.duration == pytest.approx(3.5)
        assert len(model.plan.breaking_points) == len(plan.labels)
        assert len(model.schedule.steps) == len(plan.labels) + sum(
            len(points) for points in model.plan.breaking_points
        )
        assert len(model.schedule.steps) <= 16
        assert [x / model.x0[1] for x in model.x0] == pytest.approx(list(PIANO.spectral.ratios))

        series = simulate_model(model, 10000)
        error = np.abs(np.asarray(series.rho) - piano_envelope(np.asarray(series.times)))
        assert float(np.max(error)) < 0.05

    def test_piano_shaped_envelope_bifurcates_only_at_borders(self, piano_envelope):
        """mu keeps one sign inside every segment, so breaking points carry no events."""
        plan = segment_envelope(piano_envelope)
        model = build_model(PIANO.spectral, piano_envelope, plan, dt=1e-4)

        for t_start, t_stop in model.plan.intervals:
            signs = {np.sign(s.mu) for s in model.schedule.steps if t_start <= s.t < t_stop}
            assert len(signs) == 1

        events = classify_events(model.schedule, model.a, model.b)
        assert [e.kind for e in events] == ["supercritical-pitchfork"] * 4
        assert [e.time for e in events] == pytest.approx(plan.borders[1:5])

    def test_violin_envelope_with_known_borders(self, violin_envelope):
        plan = SegmentPlan(
            borders=VIOLIN.borders, labels=["delay", "attack", "sustain", "release"]
        )

        model = build_model(VIOLIN.spectral, violin_envelope, plan, epsilon=0.03, dt=1e-4)

        assert model.a == 1
        assert model.b == pytest.approx(-2.14, abs=0.1)
        assert model.alpha == pytest.approx(23.5, abs=2.0)
        assert model.schedule.steps[0].mu == pytest.approx(-1.0 / (4.0 * abs(model.b)))
        assert model.schedule.evaluate(0.5717) == pytest.approx(-0.0734, abs=0.01)

    def test_given_breaking_points_are_kept(self, violin_envelope):
        plan = SegmentPlan(
            borders=VIOLIN.borders,
            labels=["delay", "attack", "sustain", "release"],
            breaking_points=VIOLIN.breaking_points,
        )

        model = build_model(VIOLIN.spectral, violin_envelope, plan, epsilon=0.03, dt=1e-4)

        for given, fitted in zip(VIOLIN.breaking_points, model.plan.breaking_points):
            assert set(given) <= set(fitted)
            assert fitted == sorted(fitted)
        assert set(VIOLIN.switch_times) <= set(model.schedule.switch_times)


def printed_rho(note):
    """rho of a printed model, one knot every 0.1 ms so every switch sits on a knot."""
    series = simulate_model(reference_model(note), 10000)
    return EnvelopeCurve(
        knot_times=np.asarray(series.times).tolist(),
        knot_values=np.asarray(series.rho).tolist(),
        t_end=note.borders[-1],
    )


@pytest.fixture(scope="module")
def piano_rho_envelope():
    return printed_rho(PIANO)


@pytest.mark.slow
class TestScheduleRecovery:
    """Fitting the printed models' own rho gives their schedules back."""

    def test_piano_segment_values(self, piano_rho_envelope):
        model = build_model(
            PIANO.spectral,
            piano_rho_envelope,
            reference_model(PIANO).plan,
            rho0=PIANO.rho0,
            mu0=PIANO.mus[0],
            dt=1e-4,
            constants=(1.0, -1, 0.0),
        )

        assert len(model.schedule.steps) == 10
        assert model.schedule.switch_times == pytest.approx(PIANO.switch_times)
        assert model.schedule.values == pytest.approx(PIANO.mus, rel=0.02)

    def test_piano_events_stay_at_borders(self, piano_rho_envelope):
        model = build_model(
            PIANO.spectral,
            piano_rho_envelope,
            reference_model(PIANO).plan,
            rho0=PIANO.rho0,
            mu0=PIANO.mus[0],
            dt=1e-4,
            constants=(1.0, -1, 0.0),
        )

        events = classify_events(model.schedule, model.a, model.b)

        assert [e.time for e in events] == pytest.approx(PIANO.borders[1:5])

    def test_violin_segment_values(self):
        model = build_model(
            VIOLIN.spectral,
            printed_rho(VIOLIN),
            reference_model(VIOLIN).plan,
            mu0=VIOLIN.mus[0],
            dt=1e-4,
            constants=(VIOLIN.alpha, 1, VIOLIN.b),
        )

        for t, mu in zip(VIOLIN.switch_times, VIOLIN.mus):
            assert model.schedule.evaluate(t) == pytest.approx(mu, rel=0.05)
