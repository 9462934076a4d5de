"""Seeded synthetic prices and article scores with a planted sentiment edge.

Each (asset, day) gets a latent news state ``z ~ N(0, 1)``. Articles
published in that day's open-to-open window carry noisy, squashed copies of
``z``. The log return from that day's open to the next open is::

    mu - s**2 / 2 + s * (rho * z + sqrt(1 - rho**2) * eps)

so ``rho`` is the planted correlation between news and the return earned by
a position opened at the open. With ``rho = 0`` the news is pure noise; with
``rho = 1`` the next-day move is fully determined by ``z``. The ``-s**2/2``
term makes prices martingales when ``mu = 0``.
"""
from __future__ import annotations

import dataclasses
import datetime as dt
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .aggregation import DEFAULT_OPEN, to_micros, window_bounds
from .errors import ValidationError
from .marketdata import PriceBar, PriceSeries, TradingCalendar, build_series, write_prices
from .newsfeed import (ArticleAssetScore, NewsArticle, AliasTable, format_timestamp, merge_order,
                       write_articles, write_scores)

_EPOCH = dt.datetime(1970, 1, 1, tzinfo=dt.timezone.utc)


@dataclass(frozen=True)
class SyntheticSpec:
    start_date: dt.date = dt.date(2020, 1, 1)
    n_days: int = 600
    n_assets: int = 30
    initial_price: float = 100.0
    daily_volatility: float = 0.015
    annual_drift: float = 0.0
    correlation: float = 0.0
    article_rate: float = 2.8
    sentiment_scale: float = 1.0
    score_noise: float = 0.3
    labels: bool = False
    intraday_fraction: float = 0.8
    timezone: str = "America/New_York"
    emit_articles: bool = False

    def __post_init__(self):
        problems = []
        if self.n_days < 2:
            problems.append("n_days must be >= 2")
        if self.n_assets < 1:
            problems.append("n_assets must be >= 1")
        if not self.initial_price > 0:
            problems.append("initial_price must be > 0")
        if not self.daily_volatility >= 0:
            problems.append("daily_volatility must be >= 0")
        if not -1.0 <= self.correlation <= 1.0:
            problems.append("correlation must be in [-1, 1]")
        if not self.article_rate >= 0:
            problems.append("article_rate must be >= 0")
        if not self.score_noise >= 0:
            problems.append("score_noise must be >= 0")
        if not 0.0 <= self.intraday_fraction <= 1.0:
            problems.append("intraday_fraction must be in [0, 1]")
        if problems:
            raise ValidationError("invalid synthetic spec: " + "; ".join(problems))

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown synthetic spec keys: {', '.join(unknown)}")
        data = dict(data)
        if "start_date" in data and isinstance(data["start_date"], str):
            data["start_date"] = dt.date.fromisoformat(data["start_date"])
        return cls(**data)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["start_date"] = self.start_date.isoformat()
        return d


@dataclass
class SyntheticDataset:
    spec: SyntheticSpec
    seed: int
    prices: PriceSeries
    scores: list[ArticleAssetScore]
    articles: list[NewsArticle]
    aliases: AliasTable

    @property
    def universe(self) -> list[str]:
        return self.prices.assets

    @property
    def calendar(self) -> TradingCalendar:
        return self.prices.calendar

    def write(self, out_dir: str | os.PathLike) -> list[str]:
        os.makedirs(out_dir, exist_ok=True)
        written = [os.path.join(out_dir, "prices.csv"), os.path.join(out_dir, "scores.csv")]
        write_prices(self.prices, written[0])
        write_scores(self.scores, written[1])
        if self.spec.emit_articles:
            written.append(os.path.join(out_dir, "articles.jsonl"))
            write_articles(self.articles, written[-1])
            written.append(os.path.join(out_dir, "aliases.csv"))
            with open(written[-1], "w", encoding="utf-8", newline="\n") as fh:
                fh.write("asset_id,alias\n")
                for a in self.aliases.assets:
                    for alias in sorted(self.aliases.aliases(a)):
                        fh.write(f"{a},{alias}\n")
        written.append(os.path.join(out_dir, "synth.json"))
        with open(written[-1], "w", encoding="utf-8") as fh:
            json.dump({"seed": self.seed, "spec": self.spec.to_dict()}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return written


def business_days(start: dt.date, n: int) -> list[dt.date]:
    first = np.busday_offset(np.datetime64(start, "D"), 0, roll="forward")
    days = np.busday_offset(first, np.arange(n), roll="forward")
    return [d.astype(object) for d in days]


def asset_names(n: int) -> list[str]:
    width = max(2, len(str(n - 1)))
    return [f"SYN{j:0{width}d}" for j in range(n)]


_POS_WORDS = ("surge", "rally", "upgrade", "beats", "strong")
_NEG_WORDS = ("plunge", "slump", "downgrade", "misses", "weak")


def _label(score: float) -> str:
    return "positive" if score > 1 / 3 else "negative" if score < -1 / 3 else "neutral"


def generate_synthetic_dataset(seed: int, spec: SyntheticSpec = SyntheticSpec()) -> SyntheticDataset:
    rng = np.random.default_rng(seed)
    n, k = spec.n_days, spec.n_assets
    dates = business_days(spec.start_date, n)
    assets = asset_names(k)
    sigma = spec.daily_volatility
    rho = spec.correlation

    z = rng.standard_normal((n, k))
    eps = rng.standard_normal((n, k))
    mu = spec.annual_drift / 252.0 - 0.5 * sigma ** 2
    log_ret = mu + sigma * (rho * z + math.sqrt(max(0.0, 1.0 - rho * rho)) * eps)
    log_open = np.log(spec.initial_price) + np.vstack([np.zeros((1, k)), np.cumsum(log_ret[:-1], axis=0)])
    opens = np.exp(log_open)
    closes = np.exp(log_open + spec.intraday_fraction * log_ret)
    wick = np.abs(rng.standard_normal((2, n, k))) * sigma * 0.25
    highs = np.maximum(opens, closes) * np.exp(wick[0])
    lows = np.minimum(opens, closes) * np.exp(-wick[1])
    volume = rng.integers(100_000, 1_000_000, size=(n, k))

    bars = [
        PriceBar(a, d, float(opens[i, j]), float(highs[i, j]), float(lows[i, j]), float(closes[i, j]),
                 float(volume[i, j]))
        for j, a in enumerate(assets)
        for i, d in enumerate(dates)
    ]
    prices = build_series(bars)

    bounds = window_bounds(prices.calendar, DEFAULT_OPEN, spec.timezone)
    bounds_us = np.array([to_micros(b) for b in bounds], dtype=np.int64)
    counts = rng.poisson(spec.article_rate, size=(n, k))
    total = int(counts.sum())
    day_idx = np.repeat(np.arange(n), counts.sum(axis=1))
    # rows of `counts` are flattened day-major, so the asset order repeats per day
    asset_idx = np.concatenate([np.repeat(np.arange(k), counts[i]) for i in range(n)]) if total else np.zeros(0, int)
    span = bounds_us[day_idx + 1] - bounds_us[day_idx]
    ts_us = bounds_us[day_idx] + (rng.random(total) * span).astype(np.int64)
    raw = np.tanh(spec.sentiment_scale * z[day_idx, asset_idx]) + spec.score_noise * rng.standard_normal(total)
    raw = np.clip(raw, -1.0, 1.0)

    scores, articles = [], []
    serial: dict[tuple[int, int], int] = {}
    for t, i, j, v in zip(ts_us.tolist(), day_idx.tolist(), asset_idx.tolist(), raw.tolist()):
        seq = serial.get((i, j), 0)
        serial[(i, j)] = seq + 1
        asset = assets[j]
        article_id = f"{asset}-{i:05d}-{seq:03d}"
        ts = _EPOCH + dt.timedelta(microseconds=t)
        value = {"positive": 1.0, "negative": -1.0, "neutral": 0.0}[_label(v)] if spec.labels else v
        scores.append(ArticleAssetScore(article_id, asset, value, ts))
        if spec.emit_articles:
            lab = _label(v)
            words = _POS_WORDS if lab == "positive" else _NEG_WORDS if lab == "negative" else None
            headline = f"{asset} shares {words[seq % len(words)]}" if words else f"{asset} shares trade flat"
            articles.append(NewsArticle(article_id, "synthetic", ts, headline,
                                        (f"Analysts discussed {asset} on the day.",)))
    scores.sort(key=merge_order)
    articles.sort(key=lambda a: (a.timestamp, a.article_id))
    aliases = AliasTable({a: {a} for a in assets})
    return SyntheticDataset(spec, seed, prices, scores, articles, aliases)
