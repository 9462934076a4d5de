"""The daily backtest loop and strategy comparison.

Each trading day runs four fixed phases: aggregate the open-to-open news
window, classify and build order lists, execute at the open, mark to market
at the close. Sentiment strategies keep open positions at the end of the
horizon (marked at the final close); Buy&Hold liquidates on the last day.
"""
from __future__ import annotations

import dataclasses
import datetime as dt
import json
import os
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import metrics as mt
from .aggregation import (DEFAULT_OPEN, DailyAssetSentiment, SentimentPanel, aggregate_panel,
                          default_timezone, market_open, to_micros, write_sentiment_audit)
from .errors import ContractError, DataGapError, ValidationError
from .execution import (ExecutionConfig, Fill, PortfolioState, execute_day, mark_to_market,
                        run_buy_and_hold, write_equity, write_fills)
from .marketdata import PriceSeries, TradingCalendar
from .newsfeed import ArticleAssetScore, format_timestamp
from .strategy import (BenchmarkMode, NoDataPolicy, Signal, Thresholds, benchmark_plan,
                       build_order_lists, classify)

SENTIMENT = "sentiment"
BUY_AND_HOLD = "buy_and_hold"
STRATEGIES = (SENTIMENT, BUY_AND_HOLD)
RESULT_FILES = ("config.json", "equity.csv", "fills.csv", "signals.csv", "sentiment.csv", "metrics.json")


@dataclass(frozen=True)
class BacktestConfig:
    start_date: dt.date
    end_date: dt.date
    universe: tuple[str, ...]
    name: str = "sentiment"
    strategy: str = SENTIMENT
    thresholds: Thresholds = Thresholds()
    no_data_policy: NoDataPolicy = NoDataPolicy.HOLD
    execution: ExecutionConfig = ExecutionConfig()
    scorer: str = "precomputed"
    benchmark_mode: BenchmarkMode = BenchmarkMode.EQUAL_VALUE
    metrics: mt.MetricsSettings = mt.MetricsSettings()
    market_open: dt.time = DEFAULT_OPEN
    timezone: str = field(default_factory=default_timezone)
    window_start: dt.datetime | None = None
    seed: int | None = None
    compute_alpha: bool = True

    def __post_init__(self):
        if not self.start_date < self.end_date:
            raise ValidationError(f"start_date {self.start_date} must precede end_date {self.end_date}")
        if not self.universe:
            raise ValidationError("universe must not be empty")
        if len(set(self.universe)) != len(self.universe):
            raise ValidationError("universe contains duplicates")
        object.__setattr__(self, "universe", tuple(sorted(self.universe)))
        object.__setattr__(self, "no_data_policy", NoDataPolicy(self.no_data_policy))
        object.__setattr__(self, "benchmark_mode", BenchmarkMode(self.benchmark_mode))
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.scorer not in ("precomputed", "lexicon"):
            raise ValidationError(f"scorer must be 'precomputed' or 'lexicon', got {self.scorer!r}")

    def replace(self, **changes) -> "BacktestConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "strategy": self.strategy,
            "start_date": self.start_date.isoformat(),
            "end_date": self.end_date.isoformat(),
            "universe": list(self.universe),
            "thresholds": {"sell": self.thresholds.sell_signal, "buy": self.thresholds.buy_signal},
            "no_data_policy": self.no_data_policy.value,
            "execution": dataclasses.asdict(self.execution),
            "scorer": self.scorer,
            "benchmark_mode": self.benchmark_mode.value,
            "metrics": dataclasses.asdict(self.metrics),
            "market": {"open_time": self.market_open.strftime("%H:%M"), "timezone": self.timezone},
            "window_start": self.window_start.isoformat() if self.window_start else None,
            "seed": self.seed,
            "compute_alpha": self.compute_alpha,
        }


@dataclass(frozen=True)
class SignalRecord:
    trading_date: dt.date
    asset_id: str
    score_0_100: float | None
    article_count: int
    signal: Signal
    window_start: dt.datetime
    window_end: dt.datetime
    latest_article: dt.datetime | None


@dataclass
class BacktestResult:
    config: BacktestConfig
    equity_curve: list[tuple[dt.date, float]]
    fills: list[Fill]
    signals: list[SignalRecord]
    sentiment: list[DailyAssetSentiment]
    metrics: mt.MetricsReport
    warnings: list[str] = field(default_factory=list)

    @property
    def dates(self) -> list[dt.date]:
        return [d for d, _ in self.equity_curve]

    @property
    def equity(self) -> list[float]:
        return [e for _, e in self.equity_curve]

    @property
    def base(self) -> tuple[dt.date, float]:
        return (self.config.start_date, self.config.execution.initial_capital)

    def active_signal_count(self) -> int:
        return sum(1 for s in self.signals if s.signal in (Signal.BUY, Signal.SELL))

    def cumulative_series(self) -> list[tuple[dt.date, float]]:
        return mt.cumulative_series(self.dates, self.equity, self.base[1])

    def monthly_returns(self) -> list[tuple[str, float]]:
        return mt.periodic_compound_returns(self.dates, self.equity, "month", self.base)

    def lookahead_violations(self) -> list[str]:
        """Fills whose decision consumed an article stamped at or after that day's open."""
        by_key = {(s.trading_date, s.asset_id): s for s in self.signals}
        problems = []
        if self.config.strategy != SENTIMENT:
            return problems
        for f in self.fills:
            rec = by_key.get((f.trading_date, f.asset_id))
            if rec is None:
                problems.append(f"{f.trading_date} {f.asset_id}: fill without a signal record")
                continue
            opened = market_open(f.trading_date, self.config.market_open, self.config.timezone)
            if rec.window_end != opened:
                problems.append(f"{f.trading_date} {f.asset_id}: window ends {rec.window_end}, open is {opened}")
            if rec.latest_article is not None and rec.latest_article >= opened:
                problems.append(f"{f.trading_date} {f.asset_id}: used article at {rec.latest_article} >= open {opened}")
        return problems

    def write(self, out_dir: str | os.PathLike) -> None:
        """Write the six result files, replacing any previous run in ``out_dir``."""
        with _atomic_dir(out_dir) as tmp:
            with open(os.path.join(tmp, "config.json"), "w", encoding="utf-8") as fh:
                json.dump(self.config.to_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
            write_equity(self.equity_curve, os.path.join(tmp, "equity.csv"))
            write_fills(self.fills, os.path.join(tmp, "fills.csv"))
            write_signals(self.signals, os.path.join(tmp, "signals.csv"))
            write_sentiment_audit(self.sentiment, os.path.join(tmp, "sentiment.csv"))
            with open(os.path.join(tmp, "metrics.json"), "w", encoding="utf-8") as fh:
                json.dump({"name": self.config.name, **self.metrics.to_dict(),
                           "warnings": len(self.warnings)}, fh, indent=2, sort_keys=True)
                fh.write("\n")


class _atomic_dir:
    """Build a directory next to ``target`` and swap it in on success."""

    def __init__(self, target):
        self.target = os.path.abspath(os.fspath(target))

    def __enter__(self) -> str:
        parent = os.path.dirname(self.target)
        os.makedirs(parent, exist_ok=True)
        self.tmp = tempfile.mkdtemp(prefix=".tmp-", dir=parent)
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            shutil.rmtree(self.tmp, ignore_errors=True)
            return False
        old = None
        if os.path.exists(self.target):
            old = tempfile.mkdtemp(prefix=".old-", dir=os.path.dirname(self.target))
            os.rmdir(old)
            os.rename(self.target, old)
        os.rename(self.tmp, self.target)
        if old is not None:
            shutil.rmtree(old, ignore_errors=True)
        return False


SIGNAL_COLUMNS = ("date", "asset", "score_0_100", "article_count", "signal",
                  "window_start", "window_end", "latest_article")


def write_signals(records: Iterable[SignalRecord], dest) -> None:
    import csv

    with open(dest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SIGNAL_COLUMNS)
        for r in records:
            writer.writerow([
                r.trading_date.isoformat(), r.asset_id,
                "" if r.score_0_100 is None else repr(r.score_0_100), r.article_count, r.signal.value,
                format_timestamp(r.window_start), format_timestamp(r.window_end),
                "" if r.latest_article is None else format_timestamp(r.latest_article),
            ])


_EPOCH = dt.datetime(1970, 1, 1, tzinfo=dt.timezone.utc)


def _from_micros(us: int) -> dt.datetime:
    return _EPOCH + dt.timedelta(microseconds=int(us))


def horizon(config: BacktestConfig, prices: PriceSeries) -> TradingCalendar:
    try:
        cal = prices.calendar.between(config.start_date, config.end_date)
    except ValidationError:
        raise ValidationError(f"no trading days between {config.start_date} and {config.end_date}") from None
    if len(cal) < 2:
        raise ValidationError("the horizon needs at least two trading days")
    for asset in config.universe:
        slot = prices.bars.get(asset, {})
        if not any(d in slot for d in cal):
            raise DataGapError(asset, f"{cal[0]}..{cal[-1]}")
    return cal


def _day_prices(prices: PriceSeries, universe: Sequence[str], d: dt.date) -> tuple[dict, dict]:
    opens, closes = {}, {}
    for a in universe:
        bar = prices.bars.get(a, {}).get(d)
        if bar is not None:
            opens[a] = bar.open
            closes[a] = bar.close
    return opens, closes


def _report(config: BacktestConfig, curve: list[tuple[dt.date, float]]) -> mt.MetricsReport:
    return mt.compute_report([d for d, _ in curve], [e for _, e in curve], config.metrics,
                             base=(config.start_date, config.execution.initial_capital))


def _run_sentiment(config: BacktestConfig, prices: PriceSeries, scores: Sequence[ArticleAssetScore],
                   cal: TradingCalendar) -> BacktestResult:
    panel = aggregate_panel(scores, cal, config.universe, config.market_open, config.timezone,
                            config.window_start)
    bounds = [_from_micros(b) for b in panel.bounds_us]
    state = PortfolioState.initial(config.execution)
    fills: list[Fill] = []
    records: list[SignalRecord] = []
    assets = panel.assets
    for i, d in enumerate(cal):
        row, counts, latest = panel.score[i], panel.count[i], panel.latest[i]
        signals = {}
        for j, a in enumerate(assets):
            value = None if np.isnan(row[j]) else float(row[j])
            sig = classify(value, config.thresholds)
            signals[a] = sig
            records.append(SignalRecord(d, a, value, int(counts[j]), sig, bounds[i], bounds[i + 1],
                                        None if latest[j] < 0 else _from_micros(latest[j])))
        lists = build_order_lists(signals, config.no_data_policy, d)
        opens, closes = _day_prices(prices, assets, d)
        _, day_fills = execute_day(state, lists, opens, config.execution)
        fills.extend(day_fills)
        mark_to_market(state, closes, d)
    return BacktestResult(config, state.equity_curve, fills, records, panel.records(),
                          _report(config, state.equity_curve), state.warnings)


def _run_buy_and_hold(config: BacktestConfig, prices: PriceSeries, cal: TradingCalendar) -> BacktestResult:
    opens, closes = {}, {}
    for d in cal:
        opens[d], closes[d] = _day_prices(prices, config.universe, d)
    plan = benchmark_plan(config.universe, config.execution.initial_capital, config.benchmark_mode,
                          opens[cal[0]], cal[0], cal[-1], config.execution.allow_fractional_shares)
    state, fills = run_buy_and_hold(plan, opens, closes, cal, config.execution)
    return BacktestResult(config, state.equity_curve, fills, [], [], _report(config, state.equity_curve),
                          state.warnings)


def run_backtest(config: BacktestConfig, prices: PriceSeries,
                 scores: Sequence[ArticleAssetScore] = ()) -> BacktestResult:
    cal = horizon(config, prices)
    if config.strategy == BUY_AND_HOLD:
        result = _run_buy_and_hold(config, prices, cal)
        if config.compute_alpha:
            result.metrics = result.metrics.with_alpha(0.0)
        return result
    result = _run_sentiment(config, prices, scores, cal)
    if config.compute_alpha:
        bench = _run_buy_and_hold(config.replace(strategy=BUY_AND_HOLD), prices, cal)
        result.metrics = result.metrics.with_alpha(_alpha(result.metrics, bench.metrics))
    return result


def _alpha(strategy: mt.MetricsReport, benchmark: mt.MetricsReport) -> float | mt.Undefined:
    a, b = strategy.annual_cumulative_return, benchmark.annual_cumulative_return
    if not (mt.is_defined(a) and mt.is_defined(b)):
        return mt.Undefined("undefined-cumulative-return")
    return mt.alpha(a, b, strategy.date_range, benchmark.date_range)


@dataclass
class ComparisonResult:
    results: dict[str, BacktestResult]
    benchmark: str | None

    @property
    def names(self) -> list[str]:
        return list(self.results)

    def table(self) -> list[tuple[str, dict[str, float | mt.Undefined]]]:
        """Rows in report order, one column per variant."""
        return [(label, {n: getattr(r.metrics, key) for n, r in self.results.items()})
                for label, key in mt.TABLE_ROWS]

    def to_dict(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "variants": {n: r.metrics.to_dict() for n, r in self.results.items()},
        }

    def write(self, out_dir: str | os.PathLike) -> None:
        import csv

        with _atomic_dir(out_dir) as tmp:
            with open(os.path.join(tmp, "comparison.csv"), "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["Metrics", *self.names])
                for label, cols in self.table():
                    w.writerow([label, *(_cell(cols[n]) for n in self.names)])
            with open(os.path.join(tmp, "comparison.json"), "w", encoding="utf-8") as fh:
                json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
            for n, r in self.results.items():
                with open(os.path.join(tmp, f"{n}.cumulative.csv"), "w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(["date", "cumulative_return_pct"])
                    for d, v in r.cumulative_series():
                        w.writerow([d.isoformat(), repr(v)])
                with open(os.path.join(tmp, f"{n}.monthly.csv"), "w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(["month", "compound_return_pct"])
                    for label, v in r.monthly_returns():
                        w.writerow([label, repr(v * 100.0)])


def _cell(value) -> str:
    return "" if isinstance(value, mt.Undefined) else repr(value)


def run_comparison(configs: Sequence[BacktestConfig], prices: PriceSeries,
                   scores: Sequence[ArticleAssetScore] | Mapping[str, Sequence[ArticleAssetScore]] = (),
                   benchmark: str | None = None, workers: int = 1) -> ComparisonResult:
    """Run every variant on shared inputs and attach alpha against ``benchmark``.

    ``scores`` may be a single list shared by all variants or a mapping from
    variant name to its own list (e.g. one per sentiment model).
    """
    if len(configs) < 1:
        raise ContractError("nothing to compare")
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ContractError(f"variant names must be unique: {names}")
    first = configs[0]
    for c in configs[1:]:
        if (c.start_date, c.end_date) != (first.start_date, first.end_date):
            raise ContractError(f"variant {c.name} horizon differs from {first.name}")
        if c.universe != first.universe:
            raise ContractError(f"variant {c.name} universe differs from {first.name}")
        if c.execution.initial_capital != first.execution.initial_capital:
            raise ContractError(f"variant {c.name} initial capital differs from {first.name}")
    if benchmark is not None and benchmark not in names:
        raise ContractError(f"benchmark {benchmark!r} is not one of the variants {names}")

    def job(cfg: BacktestConfig) -> BacktestResult:
        own = scores.get(cfg.name, ()) if isinstance(scores, Mapping) else scores
        return run_backtest(cfg.replace(compute_alpha=False), prices, own)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(job, configs))
    else:
        outcomes = [job(c) for c in configs]
    results = dict(sorted(zip(names, outcomes)))

    bench = results.get(benchmark) if benchmark else None
    for r in results.values():
        if bench is None:
            r.metrics = r.metrics.with_alpha(mt.Undefined("no-benchmark"))
        else:
            r.metrics = r.metrics.with_alpha(_alpha(r.metrics, bench.metrics))
    return ComparisonResult(results, benchmark)
