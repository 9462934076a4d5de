"""Signal classification, daily order lists and the Buy&Hold plan."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .aggregation import DailyAssetSentiment
from .errors import ConfigError, ValidationError

SELL_SIGNAL = 40.0
BUY_SIGNAL = 60.0


class Signal(enum.Enum):
    BUY = "Buy"
    NEUTRAL = "Neutral"
    SELL = "Sell"
    NO_DATA = "NoData"


class NoDataPolicy(str, enum.Enum):
    HOLD = "hold"
    NEUTRAL = "neutral"


class BenchmarkMode(str, enum.Enum):
    EQUAL_VALUE = "equal-value"
    EQUAL_SHARES = "equal-shares"


@dataclass(frozen=True)
class Thresholds:
    sell_signal: float = SELL_SIGNAL
    buy_signal: float = BUY_SIGNAL

    def __post_init__(self):
        if not (0.0 <= self.sell_signal < self.buy_signal <= 100.0):
            raise ValidationError(
                f"thresholds need 0 <= sell < buy <= 100, got sell={self.sell_signal}, buy={self.buy_signal}")


def classify(score: DailyAssetSentiment | float | None, thresholds: Thresholds = Thresholds()) -> Signal:
    """Buy above ``buy_signal``, Sell below ``sell_signal``, Neutral on the closed band between."""
    value = score.score_0_100 if isinstance(score, DailyAssetSentiment) else score
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return Signal.NO_DATA
    if value > thresholds.buy_signal:
        return Signal.BUY
    if value < thresholds.sell_signal:
        return Signal.SELL
    return Signal.NEUTRAL


@dataclass(frozen=True)
class OrderLists:
    trading_date: object
    buy_list: tuple[str, ...] = ()
    neutral_list: tuple[str, ...] = ()
    sell_list: tuple[str, ...] = ()

    def __post_init__(self):
        b, n, s = set(self.buy_list), set(self.neutral_list), set(self.sell_list)
        if b & n or b & s or n & s:
            raise ValidationError(f"order lists for {self.trading_date} overlap")


def build_order_lists(signals: Mapping[str, Signal], no_data_policy: NoDataPolicy = NoDataPolicy.HOLD,
                      trading_date=None) -> OrderLists:
    """Route signals into ascending-sorted Buy/Neutral/Sell lists."""
    buy, neutral, sell = [], [], []
    for asset in sorted(signals):
        sig = signals[asset]
        if sig is Signal.BUY:
            buy.append(asset)
        elif sig is Signal.SELL:
            sell.append(asset)
        elif sig is Signal.NEUTRAL or (sig is Signal.NO_DATA and NoDataPolicy(no_data_policy) is NoDataPolicy.NEUTRAL):
            neutral.append(asset)
    return OrderLists(trading_date, tuple(buy), tuple(neutral), tuple(sell))


@dataclass(frozen=True)
class BenchmarkPlan:
    """Day-one entry quantities per asset, held until ``exit_date``."""

    entry_date: object
    exit_date: object
    mode: BenchmarkMode
    quantities: Mapping[str, float] = field(default_factory=dict)
    capital: float = 0.0
    notionals: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.entry_date < self.exit_date:
            raise ValidationError(f"benchmark entry {self.entry_date} must precede exit {self.exit_date}")


def benchmark_plan(universe: Sequence[str], capital: float, mode: BenchmarkMode | str,
                   entry_prices: Mapping[str, float], entry_date, exit_date,
                   fractional: bool = True) -> BenchmarkPlan:
    """Size the Buy&Hold entry at the day-one open prices.

    Equal-value puts ``capital / N`` notional in every asset; equal-shares
    buys the same share count ``n`` of each asset with ``n * sum(prices) = capital``.
    Integer mode rounds quantities down.
    """
    mode = BenchmarkMode(mode)
    if capital <= 0:
        raise ConfigError(f"benchmark capital must be > 0, got {capital}")
    universe = sorted(universe)
    if not universe:
        raise ConfigError("benchmark universe is empty")
    missing = [a for a in universe if a not in entry_prices]
    if missing:
        raise ConfigError(f"no day-one price for {', '.join(missing)} on {entry_date}")
    if mode is BenchmarkMode.EQUAL_VALUE:
        per_asset = capital / len(universe)
        qty = {a: per_asset / entry_prices[a] for a in universe}
    else:
        shares = capital / math.fsum(entry_prices[a] for a in universe)
        qty = {a: shares for a in universe}
    if fractional and mode is BenchmarkMode.EQUAL_VALUE:
        notionals = {a: per_asset for a in universe}
    else:
        if not fractional:
            qty = {a: float(math.floor(q)) for a, q in qty.items()}
        notionals = {a: qty[a] * entry_prices[a] for a in universe}
    return BenchmarkPlan(entry_date, exit_date, mode, qty, capital, notionals)


def threshold_sweep(config, prices, scores, pairs: Iterable[tuple[float, float]]) -> list[dict]:
    """Re-run the full backtest once per ``(sell, buy)`` pair.

    Each row carries the pair, the number of executed fills, the number of
    Buy/Sell signals raised and the run's metrics report.
    """
    from .engine import run_backtest  # engine depends on this module

    rows = []
    for sell, buy in pairs:
        thresholds = Thresholds(float(sell), float(buy))
        result = run_backtest(config.replace(thresholds=thresholds), prices, scores)
        rows.append({
            "sell_signal": thresholds.sell_signal,
            "buy_signal": thresholds.buy_signal,
            "transactions": len(result.fills),
            "signals": result.active_signal_count(),
            "metrics": result.metrics,
        })
    return rows
