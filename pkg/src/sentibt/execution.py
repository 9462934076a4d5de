"""Portfolio accounting: equal-value orders at the open, commissions, shorts.

Cash conventions, applied to every fill (``N`` = notional, ``C`` = commission):

=============  ===============
action         change in cash
=============  ===============
OpenLong       ``-N - C``
CloseLong      ``+N - C``
OpenShort      ``+N - C``
CloseShort     ``-N - C``
=============  ===============

Short-sale proceeds are credited at entry, so an open short is a liability of
``quantity * price`` and equity is ``cash + sum(long q*p) - sum(short q*p)``.
There is no margin requirement and no borrow fee.
"""
from __future__ import annotations

import csv
import datetime as dt
import enum
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ConfigError, ValidationError
from .strategy import BenchmarkPlan, OrderLists

log = logging.getLogger(__name__)

INITIAL_CAPITAL = 300_000.0
ORDER_VALUE = 10_000.0
COMMISSION_RATE = 0.0005


class Side(str, enum.Enum):
    LONG = "Long"
    SHORT = "Short"


class Action(str, enum.Enum):
    OPEN_LONG = "OpenLong"
    CLOSE_LONG = "CloseLong"
    OPEN_SHORT = "OpenShort"
    CLOSE_SHORT = "CloseShort"

    @property
    def cash_sign(self) -> int:
        """Sign of the notional's effect on cash."""
        return -1 if self in (Action.OPEN_LONG, Action.CLOSE_SHORT) else 1


@dataclass(frozen=True)
class Position:
    asset_id: str
    side: Side
    quantity: float
    entry_price: float
    entry_date: dt.date

    def __post_init__(self):
        if not self.quantity > 0:
            raise ValidationError(f"position in {self.asset_id} must have positive quantity")

    def market_value(self, price: float) -> float:
        """Contribution to equity at ``price`` (negative for shorts)."""
        return self.quantity * price if self.side is Side.LONG else -self.quantity * price

    def unrealized_pnl(self, price: float) -> float:
        move = price - self.entry_price
        return self.quantity * (move if self.side is Side.LONG else -move)


@dataclass(frozen=True)
class Fill:
    trading_date: dt.date
    asset_id: str
    action: Action
    quantity: float
    price: float
    notional: float
    commission: float
    residual: float = 0.0  # order value left unspent by integer rounding

    @property
    def cash_delta(self) -> float:
        return self.action.cash_sign * self.notional - self.commission


@dataclass(frozen=True)
class ExecutionConfig:
    initial_capital: float = INITIAL_CAPITAL
    order_value: float = ORDER_VALUE
    commission_rate: float = COMMISSION_RATE
    allow_fractional_shares: bool = True
    insufficient_cash_policy: str = "skip"
    benchmark_exit_commission: bool = True

    def __post_init__(self):
        if not self.initial_capital > 0 or not self.order_value > 0:
            raise ConfigError("initial_capital and order_value must be > 0")
        if not 0.0 <= self.commission_rate < 1.0:
            raise ConfigError(f"commission_rate must be in [0, 1), got {self.commission_rate}")
        if self.insufficient_cash_policy != "skip":
            raise ConfigError(f"unsupported insufficient_cash_policy {self.insufficient_cash_policy!r}")


@dataclass
class PortfolioState:
    cash: float
    positions: dict[str, Position] = field(default_factory=dict)
    equity_curve: list[tuple[dt.date, float]] = field(default_factory=list)
    last_prices: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def initial(cls, cfg: ExecutionConfig) -> "PortfolioState":
        return cls(cash=cfg.initial_capital)

    def equity(self, prices: Mapping[str, float]) -> float:
        return self.cash + math.fsum(p.market_value(prices[a]) for a, p in self.positions.items())

    def warn(self, message: str) -> None:
        log.debug(message)
        self.warnings.append(message)


def _fill(state: PortfolioState, cfg: ExecutionConfig, date, asset, action, quantity, price,
          residual: float = 0.0, notional: float | None = None) -> Fill:
    if notional is None:
        notional = quantity * price
    fill = Fill(date, asset, action, quantity, price, notional, cfg.commission_rate * notional, residual)
    state.cash += fill.cash_delta
    return fill


def _open_quantity(cfg: ExecutionConfig, price: float) -> tuple[float, float, float]:
    """Shares, unspent residual and notional for one equal-value order."""
    if cfg.allow_fractional_shares:
        # notional is pinned to order_value; q * p can be off by an ulp
        return cfg.order_value / price, 0.0, cfg.order_value
    qty = float(math.floor(cfg.order_value / price))
    return qty, cfg.order_value - qty * price, qty * price


def close_position(state: PortfolioState, cfg: ExecutionConfig, asset: str, price: float, date) -> Fill:
    pos = state.positions.pop(asset)
    action = Action.CLOSE_LONG if pos.side is Side.LONG else Action.CLOSE_SHORT
    return _fill(state, cfg, date, asset, action, pos.quantity, price)


def execute_day(state: PortfolioState, lists: OrderLists, prices: Mapping[str, float],
                cfg: ExecutionConfig) -> tuple[PortfolioState, list[Fill]]:
    """Process the Buy, then Neutral, then Sell list at the open.

    ``state`` is updated in place and returned with the day's fills. Assets
    without an open price are skipped with a warning.
    """
    date = lists.trading_date
    fills: list[Fill] = []

    def price_of(asset: str) -> float | None:
        p = prices.get(asset)
        if p is None:
            state.warn(f"{date}: no open price for {asset}; order skipped")
        return p

    for asset in lists.buy_list:
        if asset in state.positions:
            continue
        price = price_of(asset)
        if price is None:
            continue
        qty, residual, notional = _open_quantity(cfg, price)
        if qty <= 0:
            state.warn(f"{date}: order value below one share of {asset} at {price}; buy skipped")
            continue
        if notional + cfg.commission_rate * notional > state.cash:
            state.warn(f"{date}: insufficient cash ({state.cash:.2f}) to buy {asset}; skipped")
            continue
        fills.append(_fill(state, cfg, date, asset, Action.OPEN_LONG, qty, price, residual, notional))
        state.positions[asset] = Position(asset, Side.LONG, qty, price, date)

    for asset in lists.neutral_list:
        if asset not in state.positions:
            continue
        price = price_of(asset)
        if price is None:
            continue
        fills.append(close_position(state, cfg, asset, price, date))

    for asset in lists.sell_list:
        if asset in state.positions:
            continue
        price = price_of(asset)
        if price is None:
            continue
        qty, residual, notional = _open_quantity(cfg, price)
        if qty <= 0:
            state.warn(f"{date}: order value below one share of {asset} at {price}; short skipped")
            continue
        fills.append(_fill(state, cfg, date, asset, Action.OPEN_SHORT, qty, price, residual, notional))
        state.positions[asset] = Position(asset, Side.SHORT, qty, price, date)

    for f in fills:
        state.last_prices[f.asset_id] = f.price
    return state, fills


def mark_to_market(state: PortfolioState, close_prices: Mapping[str, float], date) -> float:
    """Append ``(date, equity)`` valued at the close; gaps reuse the last known price."""
    values = []
    for asset, pos in state.positions.items():
        price = close_prices.get(asset)
        if price is None:
            price = state.last_prices.get(asset, pos.entry_price)
            state.warn(f"{date}: no close for {asset}; marked at last known price {price}")
        else:
            state.last_prices[asset] = price
        values.append(pos.market_value(price))
    equity = state.cash + math.fsum(values)
    if state.equity_curve and not state.equity_curve[-1][0] < date:
        raise ValidationError(f"equity point for {date} is not after {state.equity_curve[-1][0]}")
    state.equity_curve.append((date, equity))
    return equity


def run_buy_and_hold(plan: BenchmarkPlan, opens: Mapping[dt.date, Mapping[str, float]],
                     closes: Mapping[dt.date, Mapping[str, float]], dates: Iterable[dt.date],
                     cfg: ExecutionConfig) -> tuple[PortfolioState, list[Fill]]:
    """Buy every planned quantity at the first open, sell everything at the last open.

    ``opens``/``closes`` map each date to per-asset prices. Commission applies
    to the entry leg and, unless ``cfg.benchmark_exit_commission`` is off, to
    the exit leg.
    """
    dates = list(dates)
    if dates[0] != plan.entry_date or dates[-1] != plan.exit_date:
        raise ValidationError("benchmark dates do not match the plan")
    state = PortfolioState(cash=plan.capital or cfg.initial_capital)
    fills: list[Fill] = []
    exit_cfg = cfg if cfg.benchmark_exit_commission else ExecutionConfig(
        cfg.initial_capital, cfg.order_value, 0.0, cfg.allow_fractional_shares)
    for d in dates:
        if d == plan.entry_date:
            for asset, qty in sorted(plan.quantities.items()):
                if qty <= 0:
                    state.warn(f"{d}: benchmark quantity for {asset} rounds to zero; not bought")
                    continue
                price = opens[d][asset]
                fills.append(_fill(state, cfg, d, asset, Action.OPEN_LONG, qty, price,
                                   notional=plan.notionals.get(asset)))
                state.positions[asset] = Position(asset, Side.LONG, qty, price, d)
                state.last_prices[asset] = price
        if d == plan.exit_date:
            for asset in sorted(state.positions):
                price = opens[d].get(asset)
                if price is None:
                    price = state.last_prices[asset]
                    state.warn(f"{d}: no open for {asset}; liquidated at last known price {price}")
                fills.append(close_position(state, exit_cfg, asset, price, d))
        mark_to_market(state, closes.get(d, {}), d)
    return state, fills


FILL_COLUMNS = ("date", "asset", "action", "quantity", "price", "notional", "commission")


def write_fills(fills: Iterable[Fill], dest: str | os.PathLike) -> None:
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FILL_COLUMNS)
        for f in fills:
            writer.writerow([f.trading_date.isoformat(), f.asset_id, f.action.value, repr(f.quantity),
                             repr(f.price), repr(f.notional), repr(f.commission)])


def write_equity(curve: Iterable[tuple[dt.date, float]], dest: str | os.PathLike) -> None:
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("date", "equity"))
        for d, e in curve:
            writer.writerow([d.isoformat(), repr(e)])
