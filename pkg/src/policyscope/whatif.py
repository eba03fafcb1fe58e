"""Counterfactual lockdown scenarios.

A scenario overrides one or more indicator levels over a forecast horizon;
the same trained model produces a baseline forecast under the actual (or
last-observed) policy schedule and a counterfactual forecast under the
overridden schedule, and the per-day difference is reported.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta

from .data import INDICATORS, CountryRecord, PolicyIndicator, PolicySeries
from .errors import ForecastError, ValidationError
from .pipeline import TrainedModel, rolling_forecast

SECTOR_NAMES = {
    PolicyIndicator.SCHOOL_CLOSING: "lift-schools",
    PolicyIndicator.WORKPLACE_CLOSING: "lift-workplace",
    PolicyIndicator.GATHERING_RESTRICTIONS: "lift-gatherings",
    PolicyIndicator.PUBLIC_TRANSPORT_SHUTDOWN: "lift-transport",
    PolicyIndicator.TRAVEL_CONTROLS: "lift-borders",
}


@dataclass(frozen=True)
class Override:
    """Set one indicator to a fixed level over day offsets [from_offset, to_offset]."""

    indicator: PolicyIndicator
    level: int
    from_offset: int
    to_offset: int


@dataclass(frozen=True)
class Scenario:
    name: str
    start: date
    horizon: int
    overrides: tuple[Override, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValidationError(f"scenario horizon must be >= 1, got {self.horizon}")
        for ov in self.overrides:
            if not 0 <= ov.level <= ov.indicator.max_level:
                raise ValidationError(
                    f"{ov.indicator.name} override out of range [0,{ov.indicator.max_level}]: "
                    f"{ov.level}"
                )
            if not 0 <= ov.from_offset <= ov.to_offset < self.horizon:
                raise ValidationError(
                    f"override offsets [{ov.from_offset},{ov.to_offset}] outside "
                    f"[0,{self.horizon - 1}]"
                )


@dataclass(frozen=True)
class ScenarioResult:
    scenario_name: str
    start: date
    baseline: tuple[float, ...]
    counterfactual: tuple[float, ...]
    delta: tuple[float, ...]
    cumulative_delta: float


def apply_scenario(policy: PolicySeries, scenario: Scenario) -> PolicySeries:
    """Copy of the schedule with the scenario's overrides applied.

    Indicators without overrides keep the input levels untouched.
    """
    end_needed = scenario.start + timedelta(days=scenario.horizon - 1)
    if policy.start_date > scenario.start or policy.end_date < end_needed:
        raise ValidationError(
            f"policy [{policy.start_date}..{policy.end_date}] does not cover the scenario "
            f"range [{scenario.start}..{end_needed}]"
        )
    levels = [list(day) for day in policy.levels]
    base = policy.index_of(scenario.start)
    for ov in scenario.overrides:
        col = INDICATORS.index(ov.indicator)
        for off in range(ov.from_offset, ov.to_offset + 1):
            levels[base + off][col] = ov.level
    return PolicySeries(policy.country, policy.start_date, tuple(tuple(d) for d in levels))


def baseline_schedule(record: CountryRecord, start: date, horizon: int) -> PolicySeries:
    """The recorded policy over the horizon; days beyond the record hold the
    last observed levels."""
    levels = []
    last = record.policy.levels[-1]
    for h in range(horizon):
        day = start + timedelta(days=h)
        if record.policy.start_date <= day <= record.policy.end_date:
            levels.append(record.policy.levels[record.policy.index_of(day)])
        else:
            levels.append(last)
    return PolicySeries(record.country, start, tuple(levels))


def run_scenario(
    trained: TrainedModel, record: CountryRecord, scenario: Scenario
) -> ScenarioResult:
    """Baseline and counterfactual forecasts from identical history; per-day deltas."""
    base_sched = baseline_schedule(record, scenario.start, scenario.horizon)
    cf_sched = apply_scenario(base_sched, scenario)
    try:
        baseline = rolling_forecast(trained, record, scenario.start, scenario.horizon, base_sched)
        counterfactual = rolling_forecast(trained, record, scenario.start, scenario.horizon, cf_sched)
    except ForecastError as exc:
        raise ForecastError(f"scenario {scenario.name!r}: {exc}") from exc
    delta = tuple(c - b for c, b in zip(counterfactual.values, baseline.values))
    return ScenarioResult(
        scenario.name,
        scenario.start,
        baseline.values,
        counterfactual.values,
        delta,
        float(sum(delta)),
    )


def standard_scenarios(horizon: int, start: date) -> list[Scenario]:
    """The five single-sector scenarios: one indicator fully lifted for the
    whole horizon, all others on their actual schedule."""
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    return [
        Scenario(
            name=SECTOR_NAMES[ind],
            start=start,
            horizon=horizon,
            overrides=(Override(ind, 0, 0, horizon - 1),),
        )
        for ind in INDICATORS
    ]


def scenario_result_to_dict(result: ScenarioResult) -> dict:
    return {
        "scenario": result.scenario_name,
        "start": result.start.isoformat(),
        "dates": [
            (result.start + timedelta(days=i)).isoformat() for i in range(len(result.baseline))
        ],
        "baseline": list(result.baseline),
        "counterfactual": list(result.counterfactual),
        "delta": list(result.delta),
        "cumulative_delta": result.cumulative_delta,
    }


def scenario_from_dict(doc: dict) -> Scenario:
    """Parse the scenario JSON contract:
    {name, start, horizon, overrides: [{indicator, level, from, to}]}."""
    by_column = {ind.column: ind for ind in INDICATORS}
    by_name = {ind.name: ind for ind in INDICATORS}
    horizon = int(doc["horizon"])
    overrides = []
    for ov in doc.get("overrides", []):
        raw = str(ov["indicator"])
        ind = by_column.get(raw.lower()) or by_name.get(raw)
        if ind is None:
            raise ValidationError(f"unknown indicator {raw!r}")
        overrides.append(
            Override(
                ind,
                int(ov["level"]),
                int(ov.get("from", 0)),
                int(ov.get("to", horizon - 1)),
            )
        )
    return Scenario(
        name=str(doc["name"]),
        start=date.fromisoformat(doc["start"]),
        horizon=horizon,
        overrides=tuple(overrides),
    )
