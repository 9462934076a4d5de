"""Open-to-open sentiment aggregation on a 0-100 scale.

The window for trading day ``d`` runs from the previous trading day's market
open (inclusive) to ``d``'s market open (exclusive), so weekend and holiday
news folds into the next session. The first day's window starts at a
configured backtest-start datetime instead.

Per-article scores ``m`` in ``[-1, 1]`` are averaged and mapped to
``(m + 1) * 50``. Days without articles are ABSENT (``score_0_100 is None``),
not 50.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from .errors import ValidationError
from .marketdata import TradingCalendar
from .newsfeed import ArticleAssetScore

DEFAULT_TIMEZONE = "America/New_York"
DEFAULT_OPEN = dt.time(9, 30)

_EPOCH = dt.datetime(1970, 1, 1, tzinfo=dt.timezone.utc)
_MICRO = dt.timedelta(microseconds=1)


def default_timezone() -> str:
    return os.environ.get("SENTIBT_DEFAULT_TZ") or DEFAULT_TIMEZONE


def to_micros(ts: dt.datetime) -> int:
    """Exact integer microseconds since the Unix epoch for an aware datetime."""
    return (ts - _EPOCH) // _MICRO


@dataclass(frozen=True)
class AggregationWindow:
    asset_id: str
    window_start: dt.datetime
    window_end: dt.datetime
    trading_date: dt.date

    def __post_init__(self):
        if not self.window_start < self.window_end:
            raise ValidationError(
                f"window for {self.asset_id} on {self.trading_date}: start {self.window_start} "
                f"is not before end {self.window_end}")

    def contains(self, ts: dt.datetime) -> bool:
        return self.window_start <= ts < self.window_end


@dataclass(frozen=True)
class DailyAssetSentiment:
    asset_id: str
    trading_date: dt.date
    score_0_100: float | None
    article_count: int

    @property
    def absent(self) -> bool:
        return self.score_0_100 is None


def market_open(date: dt.date, open_time: dt.time = DEFAULT_OPEN, timezone: str | None = None) -> dt.datetime:
    """The market open of ``date`` as an aware UTC datetime."""
    tz = ZoneInfo(timezone or default_timezone())
    return dt.datetime.combine(date, open_time, tzinfo=tz).astimezone(dt.timezone.utc)


def localize(value: dt.datetime, timezone: str | None = None) -> dt.datetime:
    """Attach the market timezone to a naive datetime; aware values pass through."""
    if value.tzinfo is None:
        value = value.replace(tzinfo=ZoneInfo(timezone or default_timezone()))
    return value.astimezone(dt.timezone.utc)


def window_bounds(calendar: TradingCalendar, open_time: dt.time = DEFAULT_OPEN,
                  timezone: str | None = None, start: dt.datetime | None = None) -> list[dt.datetime]:
    """``len(calendar) + 1`` UTC boundaries; day ``i`` owns ``[b[i], b[i+1])``.

    ``start`` defaults to midnight market-local of the first trading day.
    """
    opens = [market_open(d, open_time, timezone) for d in calendar]
    if start is None:
        start = dt.datetime.combine(calendar[0], dt.time(0, 0))
    start = localize(start, timezone)
    if not start < opens[0]:
        raise ValidationError(f"backtest start {start} must precede the first market open {opens[0]}")
    return [start] + opens


def build_windows(calendar: TradingCalendar, assets: Iterable[str], open_time: dt.time = DEFAULT_OPEN,
                  timezone: str | None = None, start: dt.datetime | None = None) -> list[AggregationWindow]:
    """One window per (asset, trading day), ordered by asset then date."""
    bounds = window_bounds(calendar, open_time, timezone, start)
    return [
        AggregationWindow(asset, bounds[i], bounds[i + 1], d)
        for asset in sorted(assets)
        for i, d in enumerate(calendar)
    ]


def to_scale(mean: float) -> float:
    return (mean + 1.0) * 50.0


def aggregate(scores: Iterable[ArticleAssetScore], window: AggregationWindow) -> DailyAssetSentiment:
    selected = []
    for s in scores:
        if s.asset_id != window.asset_id:
            raise ValidationError(f"score for {s.asset_id} passed to the {window.asset_id} window")
        if window.contains(s.timestamp):
            selected.append(s.score)
    if not selected:
        return DailyAssetSentiment(window.asset_id, window.trading_date, None, 0)
    mean = math.fsum(selected) / len(selected)
    return DailyAssetSentiment(window.asset_id, window.trading_date, to_scale(mean), len(selected))


@dataclass
class SentimentPanel:
    """Daily sentiment for a universe over a calendar, stored as dense arrays.

    ``score[i, j]`` is the 0-100 score of ``assets[j]`` on ``dates[i]`` (NaN
    when absent), ``count`` the number of articles, and ``latest`` the latest
    article timestamp consumed in microseconds (-1 when none).
    """

    dates: tuple[dt.date, ...]
    assets: tuple[str, ...]
    bounds_us: np.ndarray
    score: np.ndarray
    count: np.ndarray
    latest: np.ndarray

    def get(self, asset: str, date_index: int) -> DailyAssetSentiment:
        j = self.assets.index(asset)
        s = self.score[date_index, j]
        return DailyAssetSentiment(asset, self.dates[date_index], None if np.isnan(s) else float(s),
                                   int(self.count[date_index, j]))

    def records(self) -> list[DailyAssetSentiment]:
        """Canonical (asset_id, date) order."""
        out = []
        scores, counts = self.score.tolist(), self.count.tolist()
        for j, a in enumerate(self.assets):
            for i, d in enumerate(self.dates):
                s = scores[i][j]
                out.append(DailyAssetSentiment(a, d, None if s != s else s, counts[i][j]))
        return out


def aggregate_panel(scores: Sequence[ArticleAssetScore], calendar: TradingCalendar, assets: Iterable[str],
                    open_time: dt.time = DEFAULT_OPEN, timezone: str | None = None,
                    start: dt.datetime | None = None) -> SentimentPanel:
    """Vectorised :func:`aggregate` over every (asset, day) window at once.

    Scores for assets outside ``assets`` and outside the horizon are ignored.
    """
    assets = tuple(sorted(assets))
    bounds = window_bounds(calendar, open_time, timezone, start)
    bounds_us = np.array([to_micros(b) for b in bounds], dtype=np.int64)
    n, k = len(calendar), len(assets)
    score = np.full((n, k), np.nan)
    count = np.zeros((n, k), dtype=np.int64)
    latest = np.full((n, k), -1, dtype=np.int64)

    grouped: dict[str, list[ArticleAssetScore]] = defaultdict(list)
    wanted = set(assets)
    for s in scores:
        if s.asset_id in wanted:
            grouped[s.asset_id].append(s)

    for j, asset in enumerate(assets):
        recs = grouped.get(asset)
        if not recs:
            continue
        ts = np.fromiter((to_micros(r.timestamp) for r in recs), dtype=np.int64, count=len(recs))
        vals = np.fromiter((r.score for r in recs), dtype=float, count=len(recs))
        order = np.argsort(ts, kind="stable")
        ts, vals = ts[order], vals[order]
        edges = np.searchsorted(ts, bounds_us, side="left")
        counts = np.diff(edges)
        count[:, j] = counts
        listed = vals.tolist()
        for i in np.flatnonzero(counts):
            a, b = edges[i], edges[i + 1]
            score[i, j] = to_scale(math.fsum(listed[a:b]) / (b - a))
        has = counts > 0
        latest[has, j] = ts[edges[1:][has] - 1]
    return SentimentPanel(tuple(calendar), assets, bounds_us, score, count, latest)


AUDIT_COLUMNS = ("asset_id", "trading_date", "score_0_100", "article_count")


def write_sentiment_audit(records: Iterable[DailyAssetSentiment], dest: str | os.PathLike) -> None:
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AUDIT_COLUMNS)
        for r in records:
            writer.writerow([r.asset_id, r.trading_date.isoformat(),
                             "" if r.score_0_100 is None else repr(r.score_0_100), r.article_count])
