"""A first backtest on synthetic data.

We generate a seeded universe of 10 assets over 250 trading days in which the
news scores carry a modest amount of information about the next open-to-open
return, run the sentiment strategy next to Buy&Hold, and look at what came out.

Run with ``python3 demos/01_synthetic_backtest.py [out_dir]``.
"""
import sys
from collections import Counter

import numpy as np

from sentibt import BacktestConfig, SyntheticSpec, generate_synthetic_dataset, run_backtest
from sentibt.metrics import TABLE_ROWS, is_defined

data = generate_synthetic_dataset(7, SyntheticSpec(n_days=250, n_assets=10, correlation=0.4))
cal = data.calendar
print(f"{len(data.universe)} assets, {len(cal)} trading days, {len(data.scores)} scored article mentions")

config = BacktestConfig(cal[0], cal[-1], tuple(data.universe), name="sentiment")
strategy = run_backtest(config, data.prices, data.scores)
benchmark = run_backtest(config.replace(name="buy_and_hold", strategy="buy_and_hold"), data.prices)

# Every asset gets one classification per trading day. NO_DATA marks days
# on which nobody wrote about the asset.
signals = Counter(rec.signal.name for rec in strategy.signals)
print("daily classifications:", dict(sorted(signals.items())))

actions = Counter(f.action.name for f in strategy.fills)
print("fills:", dict(sorted(actions.items())))
print("commission paid: $%.2f" % sum(f.commission for f in strategy.fills))

# Every fill must be justified by news published before the decision open.
assert strategy.lookahead_violations() == []

# The first window opens at midnight before the first session, so trades
# can already fill on day one and the first mark need not equal the capital.
equity = np.array(strategy.equity)
print("equity: first mark %.0f, low %.0f, high %.0f, end %.0f" % (equity[0], equity.min(), equity.max(), equity[-1]))

print()
print(f"{'metric':26s}{'sentiment':>12s}{'buy&hold':>12s}")
for label, key in TABLE_ROWS:
    cells = []
    for res in (strategy, benchmark):
        v = getattr(res.metrics, key)
        cells.append(f"{v:12.3f}" if is_defined(v) else f"{'n/a':>12s}")
    print(f"{label:26s}{cells[0]}{cells[1]}")

if len(sys.argv) > 1:
    strategy.write(sys.argv[1])
    print("\nwrote", sys.argv[1])
