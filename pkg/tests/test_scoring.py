"""Score normalization functions and their invariants."""
from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from matbsim.config import ScoringConfig
from matbsim.errors import AccountingError, ConfigError
from matbsim.scoring import (
    Closure,
    PerformanceWindow,
    fuel_score,
    overall_performance,
    reaction_score,
    success_rate,
    tracking_score,
    windowed_performance,
)
from matbsim.tasks import Task


class TestTrackingScore:
    def test_zero_rmse(self):
        assert tracking_score(0.0, 240.0) == 1.0

    def test_rmse_at_rmax(self):
        assert tracking_score(240.0, 240.0) == 0.0

    def test_linear_midpoint(self):
        assert tracking_score(120.0, 240.0) == 0.5

    def test_bad_rmax(self):
        with pytest.raises(ConfigError):
            tracking_score(10.0, 0.0)

    @given(st.floats(0, 2000), st.floats(1, 1000))
    def test_in_unit_interval(self, rmse, r_max):
        assert 0.0 <= tracking_score(rmse, r_max) <= 1.0


class TestReactionScore:
    def test_instant(self):
        assert reaction_score(0.0, 15.0) == 1.0

    def test_at_window(self):
        assert reaction_score(15.0, 15.0) == 0.0
        assert reaction_score(20.0, 15.0) == 0.0

    def test_midpoint(self):
        assert reaction_score(7.5, 15.0) == 0.5

    def test_expired_scores_zero(self):
        assert reaction_score(None, 15.0) == 0.0


class TestSuccessRate:
    def test_simple(self):
        assert success_rate(3, 4) == 0.75

    def test_vacuous(self):
        assert success_rate(0, 0) == 1.0

    def test_accounting_error(self):
        with pytest.raises(AccountingError):
            success_rate(5, 4)


class TestFuelScore:
    def test_band_center(self):
        assert fuel_score(2500.0) == 1.0

    def test_inclusive_bounds(self):
        assert fuel_score(2000.0) == 1.0
        assert fuel_score(3000.0) == 1.0

    def test_below_band_linear(self):
        assert fuel_score(1000.0) == 0.5

    def test_continuity_at_edges(self):
        eps = 1e-7
        assert fuel_score(2000.0 - eps) == pytest.approx(1.0, abs=1e-9)
        assert fuel_score(3000.0 + eps) == pytest.approx(1.0, abs=1e-9)

    def test_far_above_band(self):
        assert fuel_score(5000.0) == 0.0

    @given(st.floats(0, 10000))
    def test_in_unit_interval(self, level):
        assert 0.0 <= fuel_score(level) <= 1.0


class TestOverallPerformance:
    def test_mean_of_active(self):
        scores = {Task.RESMAN: 1.0, Task.SYSMON: 0.5}
        assert overall_performance(scores, [Task.RESMAN, Task.SYSMON]) == 0.75

    def test_all_perfect(self):
        scores = {t: 1.0 for t in Task}
        assert overall_performance(scores, list(Task)) == 1.0

    def test_only_active_counted(self):
        scores = {Task.RESMAN: 1.0, Task.SYSMON: 0.5, Task.TRACKING: 0.0}
        assert overall_performance(scores, [Task.RESMAN, Task.SYSMON]) == 0.75

    def test_empty_active_rejected(self):
        with pytest.raises(ValueError):
            overall_performance({Task.RESMAN: 1.0}, [])

    def test_missing_score_rejected(self):
        with pytest.raises(ValueError):
            overall_performance({Task.RESMAN: 1.0}, [Task.COMMS])

    @given(
        st.dictionaries(
            st.sampled_from(list(Task)), st.floats(0, 1), min_size=1, max_size=4
        )
    )
    def test_permutation_invariant_and_bounded(self, scores):
        active = list(scores)
        fwd = overall_performance(scores, active)
        rev = overall_performance(scores, list(reversed(active)))
        assert fwd == pytest.approx(rev, abs=1e-12)
        assert 0.0 <= fwd <= 1.0

    @given(
        st.dictionaries(
            st.sampled_from(list(Task)), st.floats(0, 1), min_size=1, max_size=4
        ),
        st.floats(0.01, 1.0),
    )
    def test_monotone_in_components(self, scores, bump):
        active = list(scores)
        base = overall_performance(scores, active)
        task = active[0]
        raised = dict(scores)
        raised[task] = min(1.0, raised[task] + bump)
        assert overall_performance(raised, active) >= base - 1e-12


class TestWindowedPerformance:
    def _cfg(self):
        return ScoringConfig()

    def test_perfect_quiet_window(self):
        data = PerformanceWindow(
            t=60.0, track_errors=[0.0] * 30, fuel_in_band=[1.0] * 30
        )
        sample = windowed_performance(data, sorted(Task), self._cfg())
        assert sample.overall == 1.0

    def test_fuel_only_active(self):
        data = PerformanceWindow(t=60.0, fuel_in_band=[1.0] * 30)
        sample = windowed_performance(data, [Task.RESMAN], self._cfg())
        assert sample.overall == 1.0

    def test_expired_event_never_raises_score(self):
        base = PerformanceWindow(
            t=60.0,
            track_errors=[10.0] * 30,
            fuel_in_band=[1.0] * 30,
            sysmon=[Closure(50.0, "resolved", 2.0)],
        )
        with_expired = PerformanceWindow(
            t=60.0,
            track_errors=[10.0] * 30,
            fuel_in_band=[1.0] * 30,
            sysmon=[Closure(50.0, "resolved", 2.0), Closure(55.0, "expired", None)],
        )
        cfg = self._cfg()
        active = sorted(Task)
        assert (
            windowed_performance(with_expired, active, cfg).overall
            <= windowed_performance(base, active, cfg).overall
        )

    def test_rmse_aggregation(self):
        data = PerformanceWindow(t=60.0, track_errors=[120.0] * 10, fuel_in_band=[1.0])
        sample = windowed_performance(data, [Task.TRACKING], self._cfg())
        assert sample.per_task[Task.TRACKING] == pytest.approx(0.5)
        assert sample.raw["tracking_rmse"] == pytest.approx(120.0)

    @given(
        st.lists(st.floats(0, 500), min_size=1, max_size=40),
        st.lists(st.floats(0, 1), min_size=1, max_size=40),
        st.lists(
            st.tuples(st.booleans(), st.floats(0, 14.9)), min_size=0, max_size=10
        ),
    )
    def test_scores_always_unit_interval(self, errs, in_band, closures):
        data = PerformanceWindow(
            t=100.0,
            track_errors=errs,
            fuel_in_band=in_band,
            sysmon=[
                Closure(90.0, "resolved" if ok else "expired", rt if ok else None)
                for ok, rt in closures
            ],
        )
        sample = windowed_performance(data, sorted(Task), self._cfg())
        assert 0.0 <= sample.overall <= 1.0
        assert all(0.0 <= v <= 1.0 for v in sample.per_task.values())
