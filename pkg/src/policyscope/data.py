"""Canonical data model: daily case counts and ordinal lockdown indicators.

Input files are two CSVs:

* ``cases.csv``  -- header ``country,date,new_cases``, one row per country-day
* ``policy.csv`` -- header ``country,date,school,workplace,gatherings,transport,travel``,
  sparse rows allowed (a level persists until the next row changes it)

All types are immutable after construction; parsing is a pure function of the
input stream.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum

from .errors import AlignmentError, ParameterError, ParseError, ValidationError

CASES_HEADER = ["country", "date", "new_cases"]
POLICY_HEADER = ["country", "date", "school", "workplace", "gatherings", "transport", "travel"]


class PolicyIndicator(Enum):
    """The five ordinal lockdown indicators, each with a fixed maximum level."""

    SCHOOL_CLOSING = ("school", 3)
    WORKPLACE_CLOSING = ("workplace", 3)
    GATHERING_RESTRICTIONS = ("gatherings", 4)
    PUBLIC_TRANSPORT_SHUTDOWN = ("transport", 2)
    TRAVEL_CONTROLS = ("travel", 4)

    def __init__(self, column: str, max_level: int):
        self.column = column
        self.max_level = max_level


INDICATORS = tuple(PolicyIndicator)
INDICATOR_MAXIMA = tuple(ind.max_level for ind in INDICATORS)


def _parse_date(raw: str, line: int) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise ParseError(f"invalid ISO-8601 date {raw!r}", line) from None


def _parse_int(raw: str, what: str, line: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"invalid integer for {what}: {raw!r}", line) from None


@dataclass(frozen=True)
class DailyCaseSeries:
    """Gap-free daily new-case counts for one country."""

    country: str
    start_date: date
    new_cases: tuple[int, ...]

    def __post_init__(self):
        for i, v in enumerate(self.new_cases):
            if v < 0:
                raise ValidationError(
                    f"negative case count {v} for {self.country} on {self.date_at(i)}"
                )

    def __len__(self) -> int:
        return len(self.new_cases)

    @property
    def end_date(self) -> date:
        """Last covered date (inclusive)."""
        return self.start_date + timedelta(days=len(self.new_cases) - 1)

    def date_at(self, index: int) -> date:
        return self.start_date + timedelta(days=index)

    def index_of(self, day: date) -> int:
        return (day - self.start_date).days


@dataclass(frozen=True)
class PolicySeries:
    """Per-day levels of the five indicators for one country.

    ``levels[i]`` is a 5-tuple ordered as :data:`INDICATORS`.
    """

    country: str
    start_date: date
    levels: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for i, day_levels in enumerate(self.levels):
            if len(day_levels) != len(INDICATORS):
                raise ValidationError(
                    f"expected {len(INDICATORS)} levels, got {len(day_levels)} "
                    f"for {self.country} on {self.date_at(i)}"
                )
            for ind, lvl in zip(INDICATORS, day_levels):
                if not 0 <= lvl <= ind.max_level:
                    raise ValidationError(
                        f"{ind.name} out of range [0,{ind.max_level}]: {lvl} "
                        f"for {self.country} on {self.date_at(i)}"
                    )

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=len(self.levels) - 1)

    def date_at(self, index: int) -> date:
        return self.start_date + timedelta(days=index)

    def index_of(self, day: date) -> int:
        return (day - self.start_date).days

    def level_of(self, indicator: PolicyIndicator, day: date) -> int:
        return self.levels[self.index_of(day)][INDICATORS.index(indicator)]


@dataclass(frozen=True)
class CountryRecord:
    """Aligned case and policy series covering an identical date range.

    ``first_case_date`` is None when the aligned range contains no positive
    count; such records are rejected by feature extraction.
    """

    country: str
    cases: DailyCaseSeries
    policy: PolicySeries
    first_case_date: date | None = field(default=None)

    def __post_init__(self):
        if self.cases.start_date != self.policy.start_date or len(self.cases) != len(self.policy):
            raise ValidationError(
                f"case and policy series are not aligned for {self.country}"
            )

    @property
    def start_date(self) -> date:
        return self.cases.start_date

    @property
    def end_date(self) -> date:
        return self.cases.end_date

    def __len__(self) -> int:
        return len(self.cases)


def _read_rows(text: str, expected_header: list[str]) -> list[tuple[int, list[str]]]:
    """Yield (1-based line number, cells) for each data row, validating the header."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input, expected header " + ",".join(expected_header), 1) from None
    if [h.strip() for h in header] != expected_header:
        raise ParseError(
            f"expected header {','.join(expected_header)!r}, got {','.join(header)!r}", 1
        )
    rows = []
    for lineno, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(expected_header):
            raise ParseError(
                f"expected {len(expected_header)} fields, got {len(cells)}", lineno
            )
        rows.append((lineno, [c.strip() for c in cells]))
    return rows


def parse_cases_csv(text: str) -> tuple[list[DailyCaseSeries], list[str]]:
    """Parse ``cases.csv`` content into per-country series.

    Rows are sorted by date per country; missing days are filled with 0 and
    reported in the returned warning list (one warning per gap).
    """
    rows = _read_rows(text, CASES_HEADER)
    per_country: dict[str, list[tuple[date, int, int]]] = {}
    order: list[str] = []
    for lineno, (country, raw_date, raw_cases) in rows:
        day = _parse_date(raw_date, lineno)
        count = _parse_int(raw_cases, "new_cases", lineno)
        if count < 0:
            raise ValidationError(f"negative case count {count} for {country}", lineno)
        if country not in per_country:
            per_country[country] = []
            order.append(country)
        per_country[country].append((day, count, lineno))

    series: list[DailyCaseSeries] = []
    warnings: list[str] = []
    for country in order:
        entries = sorted(per_country[country], key=lambda e: e[0])
        seen: dict[date, int] = {}
        for day, _, lineno in entries:
            if day in seen:
                raise ParseError(f"duplicate date {day} for {country}", lineno)
            seen[day] = lineno
        start = entries[0][0]
        values: list[int] = []
        cursor = start
        for day, count, _ in entries:
            if day > cursor:
                missing = (day - cursor).days
                warnings.append(
                    f"{country}: filled {missing} missing day(s) from {cursor} to "
                    f"{day - timedelta(days=1)} with 0"
                )
                values.extend([0] * missing)
                cursor = day
            values.append(count)
            cursor = day + timedelta(days=1)
        series.append(DailyCaseSeries(country, start, tuple(values)))
    return series, warnings


def parse_policy_csv(text: str) -> list[PolicySeries]:
    """Parse ``policy.csv`` content; missing days inherit the previous row's levels."""
    rows = _read_rows(text, POLICY_HEADER)
    per_country: dict[str, list[tuple[date, tuple[int, ...], int]]] = {}
    order: list[str] = []
    for lineno, cells in rows:
        country, raw_date = cells[0], cells[1]
        day = _parse_date(raw_date, lineno)
        levels = []
        for ind, raw in zip(INDICATORS, cells[2:]):
            lvl = _parse_int(raw, ind.column, lineno)
            if not 0 <= lvl <= ind.max_level:
                raise ValidationError(
                    f"{ind.name} out of range [0,{ind.max_level}]: {lvl}", lineno
                )
            levels.append(lvl)
        if country not in per_country:
            per_country[country] = []
            order.append(country)
        per_country[country].append((day, tuple(levels), lineno))

    series: list[PolicySeries] = []
    for country in order:
        entries = sorted(per_country[country], key=lambda e: e[0])
        seen: dict[date, int] = {}
        for day, _, lineno in entries:
            if day in seen:
                raise ParseError(f"duplicate date {day} for {country}", lineno)
            seen[day] = lineno
        start = entries[0][0]
        levels: list[tuple[int, ...]] = []
        cursor = start
        for day, day_levels, _ in entries:
            while cursor < day:  # persistence: carry the previous levels forward
                levels.append(levels[-1])
                cursor += timedelta(days=1)
            levels.append(day_levels)
            cursor = day + timedelta(days=1)
        series.append(PolicySeries(country, start, tuple(levels)))
    return series


def align(cases: DailyCaseSeries, policy: PolicySeries) -> CountryRecord:
    """Truncate both series to the intersection of their date ranges."""
    start = max(cases.start_date, policy.start_date)
    end = min(cases.end_date, policy.end_date)
    if start > end:
        raise AlignmentError(
            f"no overlap between cases [{cases.start_date}..{cases.end_date}] and "
            f"policy [{policy.start_date}..{policy.end_date}] for {cases.country}"
        )
    ci, cj = cases.index_of(start), cases.index_of(end) + 1
    pi, pj = policy.index_of(start), policy.index_of(end) + 1
    new_cases = cases.new_cases[ci:cj]
    aligned_cases = DailyCaseSeries(cases.country, start, new_cases)
    aligned_policy = PolicySeries(policy.country, start, policy.levels[pi:pj])
    first_case = None
    for i, v in enumerate(new_cases):
        if v > 0:
            first_case = start + timedelta(days=i)
            break
    return CountryRecord(cases.country, aligned_cases, aligned_policy, first_case)


def build_records(
    case_series: list[DailyCaseSeries], policy_series: list[PolicySeries]
) -> dict[str, CountryRecord]:
    """Align every country present in both inputs; countries missing a side are skipped."""
    policies = {s.country: s for s in policy_series}
    records: dict[str, CountryRecord] = {}
    for cs in case_series:
        ps = policies.get(cs.country)
        if ps is None:
            continue
        records[cs.country] = align(cs, ps)
    return records


def truncate_record(record: CountryRecord, end_exclusive: date) -> CountryRecord:
    """Record restricted to days strictly before ``end_exclusive``."""
    if end_exclusive <= record.start_date:
        raise AlignmentError(
            f"{record.country}: truncation at {end_exclusive} leaves no data"
        )
    keep = min((end_exclusive - record.start_date).days, len(record))
    return align(
        DailyCaseSeries(record.country, record.start_date, record.cases.new_cases[:keep]),
        PolicySeries(record.country, record.start_date, record.policy.levels[:keep]),
    )


def smooth_cases(series: DailyCaseSeries, window: int = 7) -> list[float]:
    """Centered moving average; edge windows shrink to the available range."""
    n = len(series)
    if window % 2 == 0 or window < 1:
        raise ParameterError(f"smoothing window must be a positive odd integer, got {window}")
    if window > n:
        raise ParameterError(f"smoothing window {window} exceeds series length {n}")
    half = window // 2
    values = series.new_cases
    out = []
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out.append(sum(values[lo:hi]) / (hi - lo))
    return out


def cases_to_csv(series_list: list[DailyCaseSeries]) -> str:
    """Serialize case series back to the ``cases.csv`` contract (dense rows)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CASES_HEADER)
    for s in series_list:
        for i, v in enumerate(s.new_cases):
            writer.writerow([s.country, s.date_at(i).isoformat(), v])
    return buf.getvalue()


def policy_to_csv(series_list: list[PolicySeries]) -> str:
    """Serialize policy series back to the ``policy.csv`` contract (dense rows)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(POLICY_HEADER)
    for s in series_list:
        for i, levels in enumerate(s.levels):
            writer.writerow([s.country, s.date_at(i).isoformat(), *levels])
    return buf.getvalue()
