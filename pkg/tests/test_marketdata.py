import datetime as dt

import pytest
from hypothesis import given, strategies as st

from sentibt.errors import DataGapError, NoPredecessorError, ParseError, ValidationError
from sentibt.marketdata import (PriceBar, TradingCalendar, build_series, close_price, load_prices,
                                open_price, previous_trading_day, write_prices)

HEADER = "asset_id,date,open,high,low,close,volume\n"


def write(tmp_path, body, name="prices.csv"):
    path = tmp_path / name
    path.write_text(HEADER + body)
    return path


def test_single_row_loads_one_bar(tmp_path):
    series = load_prices(write(tmp_path, "AAA,2021-01-04,10,11,9,10.5,100\n"))
    assert len(series) == 1
    assert series.calendar.dates == (dt.date(2021, 1, 4),)
    assert series.bar("AAA", dt.date(2021, 1, 4)) == PriceBar("AAA", dt.date(2021, 1, 4), 10, 11, 9, 10.5, 100)


def test_zero_open_is_rejected(tmp_path):
    with pytest.raises(ValidationError, match="open must be > 0"):
        load_prices(write(tmp_path, "AAA,2021-01-04,0,11,0,10.5,100\n"))


def test_low_above_open_names_asset_and_date(tmp_path):
    with pytest.raises(ValidationError) as err:
        load_prices(write(tmp_path, "AAA,2021-01-04,10,11,10.2,10.5,100\n"))
    assert "AAA" in str(err.value) and "2021-01-04" in str(err.value)


@pytest.mark.parametrize("row,line", [
    ("AAA,2021-01-04,ten,11,9,10.5,100\n", 2),
    ("AAA,2021-01-04,10,11,9,10.5,100\nBBB,04/01/2021,10,11,9,10.5,100\n", 3),
    ("AAA,2021-01-04,10,11,9\n", 2),
])
def test_malformed_rows_report_their_line(tmp_path, row, line):
    with pytest.raises(ParseError) as err:
        load_prices(write(tmp_path, row))
    assert err.value.line == line
    assert f":{line}" in str(err.value)


def test_wrong_header_is_a_parse_error(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("ticker,date,open,high,low,close,volume\n")
    with pytest.raises(ParseError):
        load_prices(path)


def test_duplicate_bar_is_rejected(tmp_path):
    with pytest.raises(ValidationError, match="duplicate"):
        load_prices(write(tmp_path, "AAA,2021-01-04,10,11,9,10,1\nAAA,2021-01-04,10,11,9,10,1\n"))


def test_calendar_is_union_of_asset_dates(tmp_path):
    series = load_prices(write(tmp_path, "AAA,2021-01-04,10,10,10,10,1\nAAA,2021-01-06,10,10,10,10,1\n"
                                         "BBB,2021-01-05,10,10,10,10,1\nBBB,2021-01-06,10,10,10,10,1\n"))
    assert list(series.calendar) == [dt.date(2021, 1, 4), dt.date(2021, 1, 5), dt.date(2021, 1, 6)]
    assert series.assets == ["AAA", "BBB"]


def test_price_projection_and_gaps():
    bar = PriceBar("AAA", dt.date(2021, 1, 5), 10.0, 12.0, 9.0, 11.0)
    other = PriceBar("BBB", dt.date(2021, 1, 4), 5.0, 5.0, 5.0, 5.0)
    series = build_series([bar, other])
    assert open_price(series, "AAA", bar.date) == 10.0
    assert close_price(series, "AAA", bar.date) == 11.0
    with pytest.raises(DataGapError) as err:
        open_price(series, "AAA", dt.date(2021, 1, 4))  # before AAA's listing
    assert err.value.asset == "AAA"
    with pytest.raises(DataGapError):
        open_price(series, "ZZZ", bar.date)


def test_previous_trading_day_examples():
    mon, tue = dt.date(2021, 1, 4), dt.date(2021, 1, 5)
    fri = dt.date(2021, 1, 8)
    next_mon = dt.date(2021, 1, 11)
    assert previous_trading_day(TradingCalendar([mon, tue]), tue) == mon
    assert previous_trading_day(TradingCalendar([fri, next_mon]), next_mon) == fri
    with pytest.raises(NoPredecessorError):
        previous_trading_day(TradingCalendar([mon, tue]), mon)


def test_calendar_rejects_unsorted_and_empty():
    with pytest.raises(ValidationError):
        TradingCalendar([])
    with pytest.raises(ValidationError):
        TradingCalendar([dt.date(2021, 1, 5), dt.date(2021, 1, 4)])
    with pytest.raises(ValidationError):
        TradingCalendar([dt.date(2021, 1, 4), dt.date(2021, 1, 4)])


date_sets = st.sets(st.dates(dt.date(2000, 1, 1), dt.date(2030, 12, 31)), min_size=2, max_size=40)


@given(date_sets, st.data())
def test_previous_trading_day_is_the_latest_earlier_date(dates, data):
    cal = TradingCalendar(sorted(dates))
    t = data.draw(st.sampled_from(cal.dates[1:]))
    prev = previous_trading_day(cal, t)
    assert prev == max(d for d in dates if d < t)
    assert not any(prev < d < t for d in dates)


@given(date_sets, st.dates(dt.date(2000, 1, 1), dt.date(2030, 12, 31)),
       st.dates(dt.date(2000, 1, 1), dt.date(2030, 12, 31)))
def test_between_matches_filter(dates, a, b):
    lo, hi = min(a, b), max(a, b)
    cal = TradingCalendar(sorted(dates))
    expected = sorted(d for d in dates if lo <= d <= hi)
    if expected:
        assert list(cal.between(lo, hi)) == expected
    else:
        with pytest.raises(ValidationError):
            cal.between(lo, hi)


prices = st.floats(0.01, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def bars(draw):
    out = []
    for asset in draw(st.sets(st.sampled_from(["AAA", "BBB", "C.D", "E-F"]), min_size=1)):
        for d in draw(st.sets(st.dates(dt.date(2020, 1, 1), dt.date(2020, 12, 31)), min_size=1, max_size=5)):
            o, c = draw(prices), draw(prices)
            hi = max(o, c) * draw(st.floats(1.0, 1.5))
            lo = min(o, c) / draw(st.floats(1.0, 1.5))
            out.append(PriceBar(asset, d, o, hi, lo, c, float(draw(st.integers(0, 10**9)))))
    return out


@given(bars())
def test_write_then_load_round_trips(tmp_path_factory, bar_list):
    folder = tmp_path_factory.mktemp("rt")
    series = build_series(bar_list)
    write_prices(series, folder / "a.csv")
    again = load_prices(folder / "a.csv")
    assert list(again) == list(series)
    assert again.calendar == series.calendar
    write_prices(again, folder / "b.csv")
    assert (folder / "a.csv").read_bytes() == (folder / "b.csv").read_bytes()
