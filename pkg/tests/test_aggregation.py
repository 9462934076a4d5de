import datetime as dt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from support import days, ny, score

from sentibt.aggregation import (AggregationWindow, aggregate, aggregate_panel, build_windows, market_open,
                                 window_bounds)
from sentibt.errors import ValidationError
from sentibt.marketdata import TradingCalendar

UTC = dt.timezone.utc
MON, TUE = dt.date(2021, 1, 4), dt.date(2021, 1, 5)
FRI, NEXT_MON = dt.date(2021, 1, 8), dt.date(2021, 1, 11)


def test_window_runs_from_previous_open_to_this_open():
    windows = build_windows(TradingCalendar([MON, TUE]), ["AAA"])
    tue = windows[1]
    assert (tue.window_start, tue.window_end) == (ny(MON), ny(TUE))
    assert tue.window_end == dt.datetime(2021, 1, 5, 14, 30, tzinfo=UTC)


def test_weekend_news_lands_on_monday():
    windows = build_windows(TradingCalendar([FRI, NEXT_MON]), ["AAA"])
    assert (windows[1].window_start, windows[1].window_end) == (ny(FRI), ny(NEXT_MON))
    saturday = ny(dt.date(2021, 1, 9), 12)
    assert windows[1].contains(saturday)


def test_first_window_starts_at_configured_start():
    start = dt.datetime(2021, 1, 1, 0, 0)
    bounds = window_bounds(TradingCalendar([MON, TUE]), start=start)
    assert bounds[0] == ny(dt.date(2021, 1, 1), 0, 0)
    default = window_bounds(TradingCalendar([MON, TUE]))
    assert default[0] == ny(MON, 0, 0)
    with pytest.raises(ValidationError):
        window_bounds(TradingCalendar([MON, TUE]), start=dt.datetime(2021, 1, 4, 10, 0))


def test_open_follows_daylight_saving():
    assert market_open(dt.date(2021, 3, 12)) == dt.datetime(2021, 3, 12, 14, 30, tzinfo=UTC)
    assert market_open(dt.date(2021, 3, 15)) == dt.datetime(2021, 3, 15, 13, 30, tzinfo=UTC)
    w = build_windows(TradingCalendar([dt.date(2021, 3, 12), dt.date(2021, 3, 15)]), ["AAA"])[1]
    assert w.window_end - w.window_start == dt.timedelta(days=3, hours=-1)


def test_timezone_override(monkeypatch):
    monkeypatch.setenv("SENTIBT_DEFAULT_TZ", "Europe/London")
    assert market_open(MON) == dt.datetime(2021, 1, 4, 9, 30, tzinfo=UTC)
    assert market_open(MON, timezone="Asia/Tokyo") == dt.datetime(2021, 1, 4, 0, 30, tzinfo=UTC)


def _window():
    return AggregationWindow("AAA", ny(MON), ny(TUE), TUE)


@pytest.mark.parametrize("values,expected", [
    ([-1.0, -1.0], 0.0),
    ([0.0], 50.0),
    ([1.0, 1.0, 1.0], 100.0),
    ([1.0, 1.0, 0.0], 250 / 3),
    ([0.5, -0.5], 50.0),
])
def test_aggregate_examples(values, expected):
    w = _window()
    got = aggregate([score("AAA", ny(MON, 12), v) for v in values], w)
    assert got.score_0_100 == pytest.approx(expected, abs=1e-12)
    assert got.article_count == len(values)


def test_no_articles_is_absent_not_fifty():
    got = aggregate([], _window())
    assert got.score_0_100 is None and got.absent and got.article_count == 0


def test_window_is_half_open():
    w = _window()
    at_start = score("AAA", ny(MON), 1.0)
    at_end = score("AAA", ny(TUE), -1.0)
    just_before_end = score("AAA", ny(TUE) - dt.timedelta(microseconds=1), 0.0)
    got = aggregate([at_start, at_end, just_before_end], w)
    assert got.article_count == 2
    assert got.score_0_100 == 75.0


def test_aggregate_rejects_foreign_asset():
    with pytest.raises(ValidationError):
        aggregate([score("BBB", ny(MON, 12), 0.0)], _window())


def test_window_needs_positive_length():
    with pytest.raises(ValidationError):
        AggregationWindow("AAA", ny(TUE), ny(TUE), TUE)


offsets = st.integers(-3 * 86_400_000_000, 12 * 86_400_000_000)


@st.composite
def score_sets(draw):
    n = draw(st.integers(0, 40))
    base = ny(MON, 0, 0)
    return [score(draw(st.sampled_from(["AAA", "BBB", "CCC"])), base + dt.timedelta(microseconds=draw(offsets)),
                  draw(st.floats(-1, 1)), f"x{i}") for i in range(n)]


@given(score_sets())
def test_windows_partition_the_horizon(scores):
    cal = TradingCalendar(days(6))
    panel = aggregate_panel(scores, cal, ["AAA", "BBB"])
    lo, hi = ny(cal[0], 0, 0), ny(cal[-1])
    inside = [s for s in scores if s.asset_id in ("AAA", "BBB") and lo <= s.timestamp < hi]
    assert panel.count.sum() == len(inside)


@given(score_sets())
def test_panel_matches_scalar_aggregate(scores):
    cal = TradingCalendar(days(6))
    panel = aggregate_panel(scores, cal, ["AAA", "BBB", "CCC"])
    windows = build_windows(cal, ["AAA", "BBB", "CCC"])
    records = panel.records()
    assert len(records) == len(windows)
    for w, rec in zip(windows, records):
        expected = aggregate([s for s in scores if s.asset_id == w.asset_id], w)
        assert rec == expected
        assert panel.get(w.asset_id, cal.index(w.trading_date)) == expected


@given(score_sets(), st.randoms())
def test_aggregation_ignores_input_order(scores, rnd):
    cal = TradingCalendar(days(6))
    a = aggregate_panel(scores, cal, ["AAA", "BBB", "CCC"])
    shuffled = list(scores)
    rnd.shuffle(shuffled)
    b = aggregate_panel(shuffled, cal, ["AAA", "BBB", "CCC"])
    assert np.array_equal(a.score, b.score, equal_nan=True)
    assert np.array_equal(a.latest, b.latest)


@given(st.lists(st.floats(-1, 1), min_size=1, max_size=15), st.data())
def test_single_score_increase_never_lowers_the_day(values, data):
    w = _window()
    k = data.draw(st.integers(0, len(values) - 1))
    bumped = data.draw(st.floats(values[k], 1.0))
    before = aggregate([score("AAA", ny(MON, 12), v) for v in values], w).score_0_100
    values = list(values)
    values[k] = bumped
    after = aggregate([score("AAA", ny(MON, 12), v) for v in values], w).score_0_100
    assert after >= before
    assert 0.0 <= before <= 100.0


def test_latest_tracks_last_consumed_article():
    cal = TradingCalendar([MON, TUE])
    s1, s2 = score("AAA", ny(MON, 11), 0.1), score("AAA", ny(MON, 15), 0.2)
    panel = aggregate_panel([s2, s1, score("AAA", ny(TUE), 1.0)], cal, ["AAA"])
    assert panel.latest[0, 0] == -1
    latest = dt.datetime(1970, 1, 1, tzinfo=UTC) + dt.timedelta(microseconds=int(panel.latest[1, 0]))
    assert latest == s2.timestamp
