from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from policyscope.data import (
    INDICATORS,
    DailyCaseSeries,
    PolicySeries,
    align,
    cases_to_csv,
    parse_cases_csv,
    parse_policy_csv,
    policy_to_csv,
    smooth_cases,
)
from policyscope.errors import (
    AlignmentError,
    ParameterError,
    ParseError,
    ValidationError,
)


class TestParseCases:
    def test_consecutive_rows(self):
        text = "country,date,new_cases\nQA,2020-03-01,5\nQA,2020-03-02,7\nQA,2020-03-03,9\n"
        series, warnings = parse_cases_csv(text)
        assert len(series) == 1
        assert series[0].country == "QA"
        assert series[0].new_cases == (5, 7, 9)
        assert warnings == []

    def test_gap_filled_with_zero_and_warned(self):
        text = "country,date,new_cases\nQA,2020-03-01,5\nQA,2020-03-03,9\n"
        series, warnings = parse_cases_csv(text)
        assert series[0].new_cases == (5, 0, 9)
        assert len(warnings) == 1

    def test_negative_cases_rejected_with_line(self):
        text = "country,date,new_cases\nQA,2020-03-01,5\nQA,2020-03-02,-2\n"
        with pytest.raises(ValidationError) as exc:
            parse_cases_csv(text)
        assert "line 3" in str(exc.value)

    def test_malformed_cases_value(self):
        text = "country,date,new_cases\nQA,2020-03-01,five\n"
        with pytest.raises(ParseError) as exc:
            parse_cases_csv(text)
        assert "line 2" in str(exc.value)

    def test_bad_date(self):
        text = "country,date,new_cases\nQA,03/01/2020,5\n"
        with pytest.raises(ParseError):
            parse_cases_csv(text)

    def test_unsorted_rows_are_sorted(self):
        text = "country,date,new_cases\nQA,2020-03-02,7\nQA,2020-03-01,5\n"
        series, _ = parse_cases_csv(text)
        assert series[0].new_cases == (5, 7)

    def test_wrong_header(self):
        with pytest.raises(ParseError):
            parse_cases_csv("a,b,c\nQA,2020-03-01,5\n")

    def test_duplicate_date_rejected(self):
        text = "country,date,new_cases\nQA,2020-03-01,5\nQA,2020-03-01,6\n"
        with pytest.raises(ParseError):
            parse_cases_csv(text)


class TestParsePolicy:
    def test_single_row(self):
        text = "country,date,school,workplace,gatherings,transport,travel\nQA,2020-03-01,3,2,4,2,4\n"
        series = parse_policy_csv(text)
        assert len(series) == 1
        assert series[0].levels == ((3, 2, 4, 2, 4),)

    def test_out_of_range_level(self):
        text = "country,date,school,workplace,gatherings,transport,travel\nQA,2020-03-01,5,2,4,2,4\n"
        with pytest.raises(ValidationError) as exc:
            parse_policy_csv(text)
        assert "SCHOOL_CLOSING out of range [0,3]" in str(exc.value)
        assert "line 2" in str(exc.value)

    def test_sparse_rows_persist(self):
        text = (
            "country,date,school,workplace,gatherings,transport,travel\n"
            "QA,2020-03-01,1,0,0,0,0\n"
            "QA,2020-03-04,2,0,0,0,0\n"
        )
        series = parse_policy_csv(text)
        assert series[0].levels == ((1, 0, 0, 0, 0),) * 3 + ((2, 0, 0, 0, 0),)


class TestAlign:
    def _series(self, start, values):
        return DailyCaseSeries("QA", start, tuple(values))

    def _policy(self, start, n):
        return PolicySeries("QA", start, tuple([(1, 0, 0, 0, 0)] * n))

    def test_overlap_intersection(self):
        record = align(
            self._series(date(2020, 1, 1), [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]),
            self._policy(date(2020, 1, 5), 11),
        )
        assert record.start_date == date(2020, 1, 5)
        assert record.end_date == date(2020, 1, 10)
        assert record.cases.new_cases == (4, 5, 6, 7, 8, 9)
        assert len(record.policy) == 6

    def test_identical_ranges_unchanged(self):
        cases = self._series(date(2020, 1, 1), [1, 2, 3])
        record = align(cases, self._policy(date(2020, 1, 1), 3))
        assert record.cases == cases

    def test_disjoint_ranges_error(self):
        with pytest.raises(AlignmentError):
            align(self._series(date(2020, 1, 1), [1, 2]), self._policy(date(2020, 2, 1), 2))

    def test_first_case_date(self):
        record = align(
            self._series(date(2020, 1, 1), [0, 0, 3, 4]), self._policy(date(2020, 1, 1), 4)
        )
        assert record.first_case_date == date(2020, 1, 3)

    def test_all_zero_first_case_undefined(self):
        record = align(
            self._series(date(2020, 1, 1), [0, 0, 0]), self._policy(date(2020, 1, 1), 3)
        )
        assert record.first_case_date is None

    def test_align_idempotent(self):
        record = align(
            self._series(date(2020, 1, 1), [0, 1, 2, 3, 4]), self._policy(date(2020, 1, 3), 5)
        )
        again = align(record.cases, record.policy)
        assert again == record


class TestSmoothing:
    def test_constant_fixed_point(self):
        series = DailyCaseSeries("QA", date(2020, 1, 1), (3, 3, 3, 3, 3))
        assert smooth_cases(series, 3) == [3, 3, 3, 3, 3]

    def test_shrunk_edges(self):
        series = DailyCaseSeries("QA", date(2020, 1, 1), (0, 3, 6))
        assert smooth_cases(series, 3) == [1.5, 3.0, 4.5]

    def test_even_window_rejected(self):
        series = DailyCaseSeries("QA", date(2020, 1, 1), (1, 2, 3, 4, 5))
        with pytest.raises(ParameterError):
            smooth_cases(series, 4)

    def test_window_longer_than_series_rejected(self):
        series = DailyCaseSeries("QA", date(2020, 1, 1), (1, 2, 3))
        with pytest.raises(ParameterError):
            smooth_cases(series, 5)

    @given(st.lists(st.integers(min_value=0, max_value=10_000), min_size=1, max_size=40))
    @settings(max_examples=50, deadline=None)
    def test_nonnegative_output(self, values):
        series = DailyCaseSeries("QA", date(2020, 1, 1), tuple(values))
        window = min(7, len(values) if len(values) % 2 else len(values) - 1)
        if window < 1:
            return
        assert all(v >= 0 for v in smooth_cases(series, window))


@st.composite
def country_records(draw):
    n = draw(st.integers(min_value=1, max_value=30))
    start = date(2020, 2, 15)
    cases = draw(st.lists(st.integers(0, 5000), min_size=n, max_size=n))
    levels = [
        tuple(draw(st.integers(0, ind.max_level)) for ind in INDICATORS) for _ in range(n)
    ]
    country = draw(st.sampled_from(["QA", "IT", "NO"]))
    return align(
        DailyCaseSeries(country, start, tuple(cases)),
        PolicySeries(country, start, tuple(levels)),
    )


class TestRoundTrip:
    @given(country_records())
    @settings(max_examples=40, deadline=None)
    def test_csv_round_trip(self, record):
        cases_text = cases_to_csv([record.cases])
        policy_text = policy_to_csv([record.policy])
        parsed_cases, warnings = parse_cases_csv(cases_text)
        parsed_policy = parse_policy_csv(policy_text)
        assert warnings == []
        assert align(parsed_cases[0], parsed_policy[0]) == record
