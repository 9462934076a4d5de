"""Daily OHLC price ingestion and the trading calendar.

Price files are CSV with a fixed header::

    asset_id,date,open,high,low,close,volume

Dates are ISO-8601 (``YYYY-MM-DD``). Missing bars are never forward-filled;
lookups for an absent ``(asset, date)`` raise :class:`DataGapError`.
"""
from __future__ import annotations

import bisect
import csv
import datetime as dt
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import DataGapError, NoPredecessorError, ParseError, ValidationError

PRICE_COLUMNS = ("asset_id", "date", "open", "high", "low", "close", "volume")


@dataclass(frozen=True, slots=True)
class PriceBar:
    asset_id: str
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float = 0.0

    def validate(self) -> None:
        """Raise :class:`ValidationError` if the OHLC invariants do not hold."""
        where = f"{self.asset_id} on {self.date.isoformat()}"
        if not self.open > 0:
            raise ValidationError(f"{where}: open must be > 0, got {self.open}")
        if not (self.low <= self.open <= self.high):
            raise ValidationError(f"{where}: open {self.open} outside [low, high]")
        if not (self.low <= self.close <= self.high):
            raise ValidationError(f"{where}: close {self.close} outside [low, high]")
        if self.volume < 0:
            raise ValidationError(f"{where}: negative volume {self.volume}")


class TradingCalendar:
    """Strictly increasing, non-empty sequence of trading dates."""

    __slots__ = ("_dates", "_index")

    def __init__(self, dates: Iterable[dt.date]):
        dates = tuple(dates)
        if not dates:
            raise ValidationError("trading calendar must not be empty")
        for a, b in zip(dates, dates[1:]):
            if not a < b:
                raise ValidationError(f"calendar dates must be strictly ascending: {a} then {b}")
        self._dates = dates
        self._index = {d: i for i, d in enumerate(dates)}

    @property
    def dates(self) -> tuple[dt.date, ...]:
        return self._dates

    def __len__(self) -> int:
        return len(self._dates)

    def __iter__(self) -> Iterator[dt.date]:
        return iter(self._dates)

    def __getitem__(self, i):
        return self._dates[i]

    def __contains__(self, d: object) -> bool:
        return d in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TradingCalendar) and self._dates == other._dates

    def __repr__(self) -> str:
        return f"TradingCalendar({len(self)} days, {self._dates[0]}..{self._dates[-1]})"

    def index(self, d: dt.date) -> int:
        try:
            return self._index[d]
        except KeyError:
            raise ValidationError(f"{d} is not a trading day") from None

    def between(self, start: dt.date, end: dt.date) -> "TradingCalendar":
        """Sub-calendar of dates in ``[start, end]``."""
        lo = bisect.bisect_left(self._dates, start)
        hi = bisect.bisect_right(self._dates, end)
        return TradingCalendar(self._dates[lo:hi])


def previous_trading_day(calendar: TradingCalendar, date: dt.date) -> dt.date:
    i = calendar.index(date)
    if i == 0:
        raise NoPredecessorError(f"{date} is the first trading day of the calendar")
    return calendar[i - 1]


@dataclass
class PriceSeries:
    """Per-asset map ``date -> PriceBar``; every date belongs to ``calendar``."""

    bars: dict[str, dict[dt.date, PriceBar]]
    calendar: TradingCalendar

    def __post_init__(self) -> None:
        for asset, by_date in self.bars.items():
            dates = list(by_date)
            if dates != sorted(dates):
                raise ValidationError(f"{asset}: dates are not ascending")
            for d in dates:
                if d not in self.calendar:
                    raise ValidationError(f"{asset}: {d} is not in the trading calendar")

    @property
    def assets(self) -> list[str]:
        return sorted(self.bars)

    def bar(self, asset: str, date: dt.date) -> PriceBar:
        try:
            return self.bars[asset][date]
        except KeyError:
            raise DataGapError(asset, date) from None

    def has_bar(self, asset: str, date: dt.date) -> bool:
        return date in self.bars.get(asset, ())

    def __iter__(self) -> Iterator[PriceBar]:
        for asset in self.assets:
            yield from self.bars[asset].values()

    def __len__(self) -> int:
        return sum(len(v) for v in self.bars.values())


def open_price(series: PriceSeries, asset: str, date: dt.date) -> float:
    return series.bar(asset, date).open


def close_price(series: PriceSeries, asset: str, date: dt.date) -> float:
    return series.bar(asset, date).close


def build_series(bars: Iterable[PriceBar]) -> PriceSeries:
    """Validate ``bars`` and index them; the calendar is the union of their dates."""
    by_asset: dict[str, dict[dt.date, PriceBar]] = {}
    for bar in bars:
        bar.validate()
        slot = by_asset.setdefault(bar.asset_id, {})
        if bar.date in slot:
            raise ValidationError(f"duplicate bar for {bar.asset_id} on {bar.date.isoformat()}")
        slot[bar.date] = bar
    if not by_asset:
        raise ValidationError("no price bars")
    calendar = TradingCalendar(sorted({d for slot in by_asset.values() for d in slot}))
    ordered = {a: dict(sorted(by_asset[a].items())) for a in sorted(by_asset)}
    return PriceSeries(ordered, calendar)


def _parse_float(text: str, name: str, line: int, source: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"column {name!r}: cannot parse {text!r} as a number", line, source) from None


def load_prices(source: str | os.PathLike) -> PriceSeries:
    """Read a price CSV. The returned series carries its calendar."""
    source = os.fspath(source)
    bars = []
    with open(source, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != PRICE_COLUMNS:
            raise ParseError(f"header must be {','.join(PRICE_COLUMNS)}", 1, source)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(PRICE_COLUMNS):
                raise ParseError(f"expected {len(PRICE_COLUMNS)} fields, got {len(row)}", line, source)
            asset = row[0].strip()
            if not asset:
                raise ParseError("empty asset_id", line, source)
            try:
                date = dt.date.fromisoformat(row[1].strip())
            except ValueError:
                raise ParseError(f"bad date {row[1]!r}", line, source) from None
            o, h, l, c, v = (_parse_float(x, n, line, source) for x, n in zip(row[2:], PRICE_COLUMNS[2:]))
            bars.append(PriceBar(asset, date, o, h, l, c, v))
    return build_series(bars)


def write_prices(series: PriceSeries | Iterable[PriceBar], dest: str | os.PathLike) -> None:
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PRICE_COLUMNS)
        for b in series:
            writer.writerow([b.asset_id, b.date.isoformat(), repr(b.open), repr(b.high),
                             repr(b.low), repr(b.close), repr(b.volume)])


def price_matrix(series: PriceSeries, assets: list[str], dates: Mapping | Iterable[dt.date], field_name: str):
    """Dense ``(len(dates), len(assets))`` array of one OHLC field; gaps are NaN."""
    import numpy as np

    dates = list(dates)
    out = np.full((len(dates), len(assets)), np.nan)
    for j, a in enumerate(assets):
        slot = series.bars.get(a, {})
        for i, d in enumerate(dates):
            bar = slot.get(d)
            if bar is not None:
                out[i, j] = getattr(bar, field_name)
    return out
