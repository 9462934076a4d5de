"""Return and risk metrics computed from a daily equity curve.

All headline metrics are reported in percent except the three ratios
(Calmar, Sharpe, Sortino). Metrics that cannot be computed come back as an
:class:`Undefined` carrying a reason code rather than as zero.

Conventions (configurable through :class:`MetricsSettings`):

* annualisation uses ``T = 252`` periods per year;
* the risk-free rate is an annual fraction, 0 by default;
* Sharpe and volatility use the sample (N-1) standard deviation, the
  downside deviation inside Sortino uses the population (N) form;
* VaR is historical simulation at the 5% quantile with linear
  interpolation of the empirical CDF (Hyndman-Fan type 4).
"""
from __future__ import annotations

import datetime as dt
import math
from dataclasses import asdict, dataclass, field, fields
from statistics import NormalDist
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractError, ValidationError

PERIODS_PER_YEAR = 252
DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class Undefined:
    reason: str

    def __repr__(self) -> str:
        return f"Undefined({self.reason!r})"


def is_defined(value) -> bool:
    return not isinstance(value, Undefined)


# -- point formulas -----------------------------------------------------------

def annual_return(v_end: float, v_begin: float, income: float = 0.0) -> float:
    """Simple one-year return including income, in percent."""
    if not v_begin > 0:
        raise ValidationError(f"beginning value must be > 0, got {v_begin}")
    return (v_end - v_begin + income) / v_begin * 100.0


def annual_compound_return(v_end: float, v_begin: float, years: float) -> float:
    """Geometric average yearly growth, in percent."""
    if not v_begin > 0:
        raise ValidationError(f"beginning value must be > 0, got {v_begin}")
    if not years > 0:
        raise ValidationError(f"years must be > 0, got {years}")
    if not v_end > 0:
        raise ValidationError(f"ending value must be > 0 for a compound return, got {v_end}")
    return ((v_end / v_begin) ** (1.0 / years) - 1.0) * 100.0


def cumulative_return(v_end: float, v_begin: float) -> float:
    if not v_begin > 0:
        raise ValidationError(f"beginning value must be > 0, got {v_begin}")
    return (v_end - v_begin) / v_begin * 100.0


def max_drawdown(equity: Sequence[float]) -> float:
    """Worst peak-to-trough decline in percent (``<= 0``)."""
    v = np.asarray(equity, dtype=float)
    if v.size == 0:
        raise ValidationError("equity curve is empty")
    if not (v > 0).all():
        raise ValidationError("equity curve must be strictly positive for a drawdown")
    peaks = np.maximum.accumulate(v)
    return float((v / peaks - 1.0).min()) * 100.0


def calmar(r_p: float, r_f: float, mdd: float) -> float | Undefined:
    """Excess return over the drawdown magnitude; all inputs in percent."""
    if mdd == 0:
        return Undefined("no-drawdown")
    return (r_p - r_f) / abs(mdd)


def returns_from_equity(equity: Sequence[float]) -> np.ndarray:
    v = np.asarray(equity, dtype=float)
    return v[1:] / v[:-1] - 1.0


def sharpe(returns: Sequence[float], risk_free: float = 0.0,
           periods_per_year: int = PERIODS_PER_YEAR) -> float | Undefined:
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        return Undefined("insufficient-data")
    sd = r.std(ddof=1)
    # a constant series can carry a rounding-level std; treat it as zero
    if sd == 0 or np.ptp(r) == 0:
        return Undefined("zero-volatility")
    return float((r.mean() * periods_per_year - risk_free) / (sd * math.sqrt(periods_per_year)))


def downside_deviation(returns: Sequence[float], mar: float = 0.0) -> float:
    r = np.asarray(returns, dtype=float)
    shortfall = np.minimum(r - mar, 0.0)
    return float(math.sqrt((shortfall ** 2).mean()))


def sortino(returns: Sequence[float], risk_free: float = 0.0,
            periods_per_year: int = PERIODS_PER_YEAR) -> float | Undefined:
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        return Undefined("insufficient-data")
    mar = risk_free / periods_per_year
    if not (r < mar).any():
        return Undefined("no-downside")
    sd = downside_deviation(r, mar)
    if sd == 0:
        return Undefined("no-downside")
    return float((r.mean() * periods_per_year - risk_free) / (sd * math.sqrt(periods_per_year)))


def annual_volatility(returns: Sequence[float], periods_per_year: int = PERIODS_PER_YEAR) -> float | Undefined:
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        return Undefined("insufficient-data")
    return float(r.std(ddof=1) * math.sqrt(periods_per_year) * 100.0)


def var_95_daily(returns: Sequence[float], confidence: float = 0.95,
                 method: str = "historical") -> float | Undefined:
    """One-day VaR as a non-negative loss magnitude in percent."""
    r = np.asarray(returns, dtype=float)
    if r.size < 20:
        return Undefined("insufficient-data")
    tail = 1.0 - confidence
    if method == "historical":
        q = float(np.quantile(r, tail, method="interpolated_inverted_cdf"))
    elif method == "parametric":
        q = float(r.mean() + NormalDist().inv_cdf(tail) * r.std(ddof=1))
    else:
        raise ValidationError(f"unknown VaR method {method!r}")
    return max(0.0, -q) * 100.0


def alpha(strategy_cumulative: float, benchmark_cumulative: float,
          strategy_range: tuple | None = None, benchmark_range: tuple | None = None) -> float:
    """Strategy minus benchmark cumulative return (percentage points)."""
    if strategy_range is not None and benchmark_range is not None and tuple(strategy_range) != tuple(benchmark_range):
        raise ContractError(f"alpha over mismatched ranges {strategy_range} vs {benchmark_range}")
    return strategy_cumulative - benchmark_cumulative


# -- series --------------------------------------------------------------------

def _period_key(d: dt.date, period: str):
    if period == "month":
        return (d.year, d.month)
    if period == "year":
        return (d.year,)
    raise ValidationError(f"period must be 'month' or 'year', got {period!r}")


def _period_label(key) -> str:
    return f"{key[0]:04d}-{key[1]:02d}" if len(key) == 2 else f"{key[0]:04d}"


def periodic_compound_returns(dates: Sequence[dt.date], equity: Sequence[float], period: str = "month",
                              base: tuple[dt.date, float] | None = None) -> list[tuple[str, float]]:
    """Per calendar period, ``end / start - 1`` as a fraction.

    ``start`` is the last equity point before the period (``base`` when
    given, otherwise the first point of the curve, which then only serves
    as the starting value). The product of ``1 + r`` telescopes to
    ``V_e / V_b``.
    """
    dates, values = list(dates), list(equity)
    if base is not None:
        dates, values = [base[0]] + dates, [base[1]] + values
    if len(dates) < 2:
        return []
    out = []
    prev_value = values[0]
    i = 1
    while i < len(dates):
        key = _period_key(dates[i], period)
        j = i
        while j + 1 < len(dates) and _period_key(dates[j + 1], period) == key:
            j += 1
        out.append((_period_label(key), values[j] / prev_value - 1.0))
        prev_value = values[j]
        i = j + 1
    return out


def cumulative_series(dates: Sequence[dt.date], equity: Sequence[float], base_value: float) -> list[tuple[dt.date, float]]:
    """Running cumulative return in percent against ``base_value``."""
    return [(d, (v - base_value) / base_value * 100.0) for d, v in zip(dates, equity)]


def _year_fraction(start: dt.date, end_inclusive: dt.date, year: int) -> float:
    lo = max(start, dt.date(year, 1, 1))
    hi = min(end_inclusive + dt.timedelta(days=1), dt.date(year + 1, 1, 1))
    days_in_year = (dt.date(year + 1, 1, 1) - dt.date(year, 1, 1)).days
    return max(0, (hi - lo).days) / days_in_year


def annual_return_from_curve(dates: Sequence[dt.date], equity: Sequence[float], base: tuple[dt.date, float],
                             income_by_year: Mapping[int, float] | None = None) -> float:
    """Calendar-year simple returns averaged over the years covered.

    Every calendar year contributes its simple return (with that year's
    income); partial years count for their covered fraction in the
    denominator, so a horizon of exactly one calendar year reduces to
    :func:`annual_return`.
    """
    income_by_year = income_by_year or {}
    yearly = periodic_compound_returns(dates, equity, "year", base)
    if not yearly:
        raise ValidationError("equity curve does not extend past its base point")
    # re-derive start/end values per year so income enters as in the point formula
    all_dates, all_values = [base[0]] + list(dates), [base[1]] + list(equity)
    total, weight = 0.0, 0.0
    start_value = all_values[0]
    for label, _ in yearly:
        year = int(label)
        end_value = [v for d, v in zip(all_dates[1:], all_values[1:]) if d.year == year][-1]
        total += annual_return(end_value, start_value, income_by_year.get(year, 0.0))
        weight += _year_fraction(base[0], all_dates[-1], year)
        start_value = end_value
    return total / weight


# -- report --------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsSettings:
    periods_per_year: int = PERIODS_PER_YEAR
    risk_free: float = 0.0
    var_method: str = "historical"
    var_confidence: float = 0.95
    days_per_year: float = DAYS_PER_YEAR

    def __post_init__(self):
        if not self.periods_per_year > 0:
            raise ValidationError("periods_per_year must be > 0")
        if self.var_method not in ("historical", "parametric"):
            raise ValidationError(f"unknown VaR method {self.var_method!r}")

    def conventions(self) -> dict:
        return {
            **asdict(self),
            "annual_return": "mean of calendar-year simple returns, partial years weighted by covered fraction",
            "annual_compound_return": "n = elapsed days / days_per_year",
            "calmar_return": "annual compound return",
            "sharpe_std": "sample (N-1)",
            "sortino_downside": "population (N), MAR = risk_free / periods_per_year",
            "var_quantile": "interpolated inverted CDF" if self.var_method == "historical" else "normal",
        }


TABLE_ROWS = (
    ("Annual Return", "annual_return"),
    ("Annual Compound Return", "annual_compound_return"),
    ("Annual Cumulative Return", "annual_cumulative_return"),
    ("Calmar Ratio", "calmar"),
    ("Sharpe Ratio", "sharpe"),
    ("Sortino Ratio", "sortino"),
    ("MDD", "mdd"),
    ("Annual Volatility", "annual_volatility"),
    ("95% Daily VaR", "var_95_daily"),
    ("Alpha", "alpha"),
)


@dataclass(frozen=True)
class MetricsReport:
    annual_return: float | Undefined
    annual_compound_return: float | Undefined
    annual_cumulative_return: float | Undefined
    calmar: float | Undefined
    sharpe: float | Undefined
    sortino: float | Undefined
    mdd: float | Undefined
    annual_volatility: float | Undefined
    var_95_daily: float | Undefined
    alpha: float | Undefined = Undefined("no-benchmark")
    start_date: dt.date | None = None
    end_date: dt.date | None = None
    conventions: dict = field(default_factory=dict, compare=False)

    @property
    def date_range(self) -> tuple:
        return (self.start_date, self.end_date)

    def values(self) -> dict:
        return {name: getattr(self, name) for _, name in TABLE_ROWS}

    def with_alpha(self, value: float | Undefined) -> "MetricsReport":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["alpha"] = value
        return MetricsReport(**data)

    def to_dict(self) -> dict:
        vals = self.values()
        return {
            "metrics": {k: (None if isinstance(v, Undefined) else v) for k, v in vals.items()},
            "undefined": {k: v.reason for k, v in vals.items() if isinstance(v, Undefined)},
            "start_date": self.start_date.isoformat() if self.start_date else None,
            "end_date": self.end_date.isoformat() if self.end_date else None,
            "conventions": self.conventions,
        }


def compute_report(dates: Sequence[dt.date], equity: Sequence[float],
                   settings: MetricsSettings = MetricsSettings(),
                   base: tuple[dt.date, float] | None = None,
                   income_by_year: Mapping[int, float] | None = None) -> MetricsReport:
    """Every metric for one equity curve.

    ``base`` is the ``(start_date, initial_value)`` the curve grew from; when
    omitted the first curve point plays that role.
    """
    dates, equity = list(dates), [float(v) for v in equity]
    if not dates or len(dates) != len(equity):
        raise ValidationError("equity curve needs matching, non-empty dates and values")
    if base is None:
        base, dates, equity = (dates[0], equity[0]), dates[1:], equity[1:]
        if not dates:
            raise ValidationError("equity curve needs at least two points")
    v_b, v_e = base[1], equity[-1]
    full = [v_b] + equity
    r = returns_from_equity(full)
    years = (dates[-1] - base[0]).days / settings.days_per_year

    ann = annual_return_from_curve(dates, equity, base, income_by_year)
    cum = cumulative_return(v_e, v_b)
    if years > 0 and v_e > 0:
        cagr = annual_compound_return(v_e, v_b, years)
    else:
        cagr = Undefined("non-positive-horizon" if years <= 0 else "non-positive-equity")
    if (np.asarray(full) > 0).all():
        mdd = max_drawdown(full)
    else:
        mdd = Undefined("non-positive-equity")
    if isinstance(cagr, Undefined) or isinstance(mdd, Undefined):
        cal = Undefined(cagr.reason if isinstance(cagr, Undefined) else mdd.reason)
    else:
        cal = calmar(cagr, settings.risk_free * 100.0, mdd)
    return MetricsReport(
        annual_return=ann,
        annual_compound_return=cagr,
        annual_cumulative_return=cum,
        calmar=cal,
        sharpe=sharpe(r, settings.risk_free, settings.periods_per_year),
        sortino=sortino(r, settings.risk_free, settings.periods_per_year),
        mdd=mdd,
        annual_volatility=annual_volatility(r, settings.periods_per_year),
        var_95_daily=var_95_daily(r, settings.var_confidence, settings.var_method),
        start_date=base[0],
        end_date=dates[-1],
        conventions=settings.conventions(),
    )
