"""The risk metrics on a small hand-made equity curve.

Each number printed here can be checked with a calculator, which makes this a
quick way to see exactly which conventions the library uses: 252 periods a
year, sample standard deviation for Sharpe, population downside deviation for
Sortino, an interpolated empirical quantile for historical VaR, and years
counted as elapsed days over 365.25 for the compound return.
"""
import datetime as dt

import numpy as np

from sentibt import metrics as mt

# Twelve month-end values of a $100k account.
values = np.array([100, 104, 101, 97, 103, 110, 108, 99, 105, 112, 118, 121], dtype=float) * 1000
dates = [dt.date(2021, m, 28) for m in range(1, 13)]

print("max drawdown: %.2f%%" % mt.max_drawdown(values))  # 110k to 99k
print("peak-to-trough by hand: %.2f%%" % ((99 / 110 - 1) * 100))

r = mt.returns_from_equity(values)
print("period returns:", np.round(r, 4))
print("Sharpe (T=12):   %.4f" % mt.sharpe(r, periods_per_year=12))
print("Sortino (T=12):  %.4f" % mt.sortino(r, periods_per_year=12))
print("volatility (T=12): %.2f%%" % mt.annual_volatility(r, periods_per_year=12))

# Fewer than 20 observations is too few for a historical quantile.
print("VaR on 11 returns:", mt.var_95_daily(r))
rng = np.random.default_rng(0)
daily = rng.normal(0.0004, 0.012, 500)
print("historical 95%% VaR on 500 draws: %.3f%%" % mt.var_95_daily(daily))
print("parametric 95%% VaR on 500 draws: %.3f%%" % mt.var_95_daily(daily, method="parametric"))

# Doubling over two years is 41.42% a year, compounded.
print("CAGR 100k -> 200k over 2 years: %.4f%%" % mt.annual_compound_return(200_000, 100_000, 2))

report = mt.compute_report(dates, values, base=(dt.date(2020, 12, 31), 100_000.0))
for label, key in mt.TABLE_ROWS:
    print(f"  {label:26s} {getattr(report, key)!r}")
