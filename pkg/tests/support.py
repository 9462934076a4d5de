"""Builders and independent oracles shared by the test modules."""
from __future__ import annotations

import datetime as dt
import itertools
import math
from zoneinfo import ZoneInfo

import numpy as np

from sentibt.execution import Action
from sentibt.marketdata import PriceBar, build_series
from sentibt.newsfeed import ArticleAssetScore
from sentibt.synthetic import business_days

NY = ZoneInfo("America/New_York")
UTC = dt.timezone.utc
_ids = itertools.count()


def ny(date: dt.date, hour: int = 9, minute: int = 30, second: int = 0, micro: int = 0) -> dt.datetime:
    """A New York wall-clock instant as an aware UTC datetime."""
    return dt.datetime(date.year, date.month, date.day, hour, minute, second, micro, tzinfo=NY).astimezone(UTC)


def days(n: int, start: dt.date = dt.date(2021, 1, 4)) -> list[dt.date]:
    return business_days(start, n)


def series_from(opens: dict[str, list[float]], closes: dict[str, list[float]] | None = None,
                dates: list[dt.date] | None = None):
    """Price series whose bars have the given opens (and closes, default = opens)."""
    closes = closes or opens
    n = max(len(v) for v in opens.values())
    dates = dates or days(n)
    bars = []
    for asset in opens:
        for d, o, c in zip(dates, opens[asset], closes[asset]):
            if o is None:
                continue
            bars.append(PriceBar(asset, d, o, max(o, c), min(o, c), c, 1000.0))
    return build_series(bars)


def score(asset: str, ts: dt.datetime, value: float, article_id: str | None = None) -> ArticleAssetScore:
    return ArticleAssetScore(article_id or f"a{next(_ids):06d}", asset, value, ts)


def brute_force_mdd(values) -> float:
    """O(n^2) worst ``v_j / v_i - 1`` over ``i <= j``, in percent."""
    v = list(map(float, values))
    worst = 0.0
    for i in range(len(v)):
        for j in range(i, len(v)):
            worst = min(worst, v[j] / v[i] - 1.0)
    return worst * 100.0


def brute_force_mdd_batch(curves: np.ndarray) -> np.ndarray:
    """Vectorised O(n^2) oracle: rows are curves, every (i <= j) pair is checked."""
    n = curves.shape[1]
    ratio = curves[:, None, :] / curves[:, :, None] - 1.0
    mask = np.triu(np.ones((n, n), dtype=bool))
    return np.where(mask, ratio, 0.0).min(axis=(1, 2)) * 100.0


def ledger_replay(fills, final_closes: dict[str, float], initial_capital: float) -> dict[str, float]:
    """Rebuild P&L from the fill log alone, without touching the engine's cash.

    Returns realized P&L, unrealized P&L of still-open positions at
    ``final_closes``, total commissions and the reconciled equity.
    """
    open_pos: dict[str, tuple[str, float, float]] = {}
    realized = commissions = 0.0
    for f in fills:
        commissions += f.commission
        if f.action in (Action.OPEN_LONG, Action.OPEN_SHORT):
            assert f.asset_id not in open_pos, f"double open of {f.asset_id} on {f.trading_date}"
            open_pos[f.asset_id] = (f.action.value, f.quantity, f.notional)
        else:
            side, qty, entry_notional = open_pos.pop(f.asset_id)
            assert qty == f.quantity
            if f.action is Action.CLOSE_LONG:
                realized += f.notional - entry_notional
            else:
                realized += entry_notional - f.notional
    unrealized = 0.0
    for asset, (side, qty, entry_notional) in open_pos.items():
        move = qty * final_closes[asset] - entry_notional
        unrealized += move if side == Action.OPEN_LONG.value else -move
    return {
        "realized": realized,
        "unrealized": unrealized,
        "commissions": commissions,
        "equity": initial_capital + realized + unrealized - commissions,
    }


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def isclose(a, b, tol=1e-12) -> bool:
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)
