from datetime import date, timedelta

import pytest

from policyscope.data import INDICATORS, PolicyIndicator, PolicySeries
from policyscope.errors import ValidationError
from policyscope.whatif import (
    Override,
    Scenario,
    apply_scenario,
    baseline_schedule,
    run_scenario,
    scenario_from_dict,
    scenario_result_to_dict,
    standard_scenarios,
)

from test_pipeline import trained_fixture

START = date(2020, 2, 15)


def schedule(levels, start=START):
    return PolicySeries("C00", start, tuple(levels))


class TestScenarioValidation:
    def test_out_of_range_level(self):
        with pytest.raises(ValidationError):
            Scenario(
                "bad",
                START,
                5,
                (Override(PolicyIndicator.GATHERING_RESTRICTIONS, 5, 0, 4),),
            )

    def test_offsets_outside_horizon(self):
        with pytest.raises(ValidationError):
            Scenario("bad", START, 5, (Override(PolicyIndicator.SCHOOL_CLOSING, 0, 0, 5),))

    def test_zero_horizon(self):
        with pytest.raises(ValidationError):
            Scenario("bad", START, 0)


class TestApplyScenario:
    def test_empty_overrides_identity(self):
        sched = schedule([(1, 1, 2, 1, 2)] * 5)
        scenario = Scenario("identity", START, 5)
        assert apply_scenario(sched, scenario) == sched

    def test_lift_schools(self):
        sched = schedule([(3, 1, 2, 1, 2)] * 5)
        scenario = Scenario(
            "lift-schools", START, 5, (Override(PolicyIndicator.SCHOOL_CLOSING, 0, 0, 4),)
        )
        out = apply_scenario(sched, scenario)
        for day in out.levels:
            assert day[0] == 0
            assert day[1:] == (1, 2, 1, 2)

    def test_partial_range_override(self):
        sched = schedule([(3, 0, 0, 0, 0)] * 6)
        scenario = Scenario(
            "partial", START, 6, (Override(PolicyIndicator.SCHOOL_CLOSING, 1, 2, 3),)
        )
        out = apply_scenario(sched, scenario)
        assert [d[0] for d in out.levels] == [3, 3, 1, 1, 3, 3]

    def test_insufficient_coverage(self):
        sched = schedule([(1, 1, 2, 1, 2)] * 3)
        scenario = Scenario("long", START, 5)
        with pytest.raises(ValidationError):
            apply_scenario(sched, scenario)


class TestStandardScenarios:
    def test_five_scenarios_one_per_indicator(self):
        scenarios = standard_scenarios(7, START)
        assert len(scenarios) == 5
        overridden = [s.overrides[0].indicator for s in scenarios]
        assert set(overridden) == set(INDICATORS)
        for s in scenarios:
            assert len(s.overrides) == 1
            assert s.overrides[0].level == 0
            assert s.overrides[0].from_offset == 0
            assert s.overrides[0].to_offset == 6

    def test_borders_scenario_targets_travel(self):
        scenarios = {s.name: s for s in standard_scenarios(3, START)}
        assert scenarios["lift-borders"].overrides[0].indicator is PolicyIndicator.TRAVEL_CONTROLS


class TestRunScenario:
    def test_identity_scenario_zero_delta(self):
        records, trained = trained_fixture()
        record = records["C00"]
        start = record.end_date + timedelta(days=1)
        scenario = Scenario("identity", start, 4)
        result = run_scenario(trained, record, scenario)
        assert result.baseline == result.counterfactual
        assert all(d == 0.0 for d in result.delta)
        assert result.cumulative_delta == 0.0

    def test_deterministic(self):
        records, trained = trained_fixture()
        record = records["C00"]
        start = record.end_date + timedelta(days=1)
        scenario = Scenario(
            "lift-schools", start, 4, (Override(PolicyIndicator.SCHOOL_CLOSING, 0, 0, 3),)
        )
        r1 = run_scenario(trained, record, scenario)
        r2 = run_scenario(trained, record, scenario)
        assert r1 == r2

    def test_delta_identity_holds(self):
        records, trained = trained_fixture()
        record = records["C00"]
        start = record.end_date + timedelta(days=1)
        scenario = Scenario(
            "lift-borders", start, 5, (Override(PolicyIndicator.TRAVEL_CONTROLS, 0, 0, 4),)
        )
        result = run_scenario(trained, record, scenario)
        assert len(result.baseline) == len(result.counterfactual) == len(result.delta) == 5
        for b, c, d in zip(result.baseline, result.counterfactual, result.delta):
            assert d == pytest.approx(c - b, abs=1e-9)
        assert result.cumulative_delta == pytest.approx(sum(result.delta), abs=1e-9)

    def test_locality_of_override(self):
        records, trained = trained_fixture()
        record = records["C00"]
        start = record.end_date + timedelta(days=1)
        base = baseline_schedule(record, start, 4)
        scenario = Scenario(
            "lift-schools", start, 4, (Override(PolicyIndicator.SCHOOL_CLOSING, 0, 0, 3),)
        )
        applied = apply_scenario(base, scenario)
        for day_base, day_applied in zip(base.levels, applied.levels):
            assert day_applied[1:] == day_base[1:]


class TestBaselineSchedule:
    def test_uses_recorded_policy_when_available(self):
        records, _ = trained_fixture()
        record = records["C00"]
        start = record.start_date + timedelta(days=10)
        sched = baseline_schedule(record, start, 3)
        for h in range(3):
            day = start + timedelta(days=h)
            assert sched.levels[h] == record.policy.levels[record.policy.index_of(day)]

    def test_holds_last_levels_beyond_record(self):
        records, _ = trained_fixture()
        record = records["C00"]
        start = record.end_date + timedelta(days=1)
        sched = baseline_schedule(record, start, 4)
        assert all(levels == record.policy.levels[-1] for levels in sched.levels)


class TestSerialization:
    def test_scenario_json_round_trip(self):
        doc = {
            "name": "lift-borders",
            "start": "2020-09-01",
            "horizon": 7,
            "overrides": [{"indicator": "travel", "level": 0, "from": 0, "to": 6}],
        }
        scenario = scenario_from_dict(doc)
        assert scenario.name == "lift-borders"
        assert scenario.overrides[0].indicator is PolicyIndicator.TRAVEL_CONTROLS

    def test_defaults_full_horizon(self):
        doc = {
            "name": "x",
            "start": "2020-09-01",
            "horizon": 5,
            "overrides": [{"indicator": "school", "level": 0}],
        }
        scenario = scenario_from_dict(doc)
        assert scenario.overrides[0].to_offset == 4

    def test_unknown_indicator(self):
        doc = {
            "name": "x",
            "start": "2020-09-01",
            "horizon": 5,
            "overrides": [{"indicator": "curfew", "level": 0}],
        }
        with pytest.raises(ValidationError):
            scenario_from_dict(doc)

    def test_result_dict_shape(self):
        records, trained = trained_fixture()
        record = records["C00"]
        start = record.end_date + timedelta(days=1)
        result = run_scenario(trained, record, Scenario("identity", start, 3))
        doc = scenario_result_to_dict(result)
        assert doc["scenario"] == "identity"
        assert len(doc["dates"]) == len(doc["baseline"]) == 3
        assert doc["delta"] == [0.0, 0.0, 0.0]
