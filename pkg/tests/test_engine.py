import datetime as dt
import json

import pytest

from support import days, ny, score, series_from

from sentibt import metrics as mt
from sentibt.engine import RESULT_FILES, BacktestConfig, run_backtest, run_comparison
from sentibt.errors import ContractError, DataGapError, ValidationError
from sentibt.execution import Action, ExecutionConfig
from sentibt.strategy import Signal, Thresholds
from sentibt.synthetic import SyntheticSpec, generate_synthetic_dataset

FREE = ExecutionConfig(commission_rate=0.0)


def config(cal, universe=("AAA",), **kw):
    return BacktestConfig(cal[0], cal[-1], tuple(universe), **kw)


def test_no_articles_means_no_fills_and_flat_equity():
    cal = days(5)
    prices = series_from({"AAA": [10, 11, 9, 12, 13], "BBB": [5, 5, 6, 7, 4]})
    result = run_backtest(config(cal, ("AAA", "BBB")), prices, [])
    assert result.fills == []
    assert result.equity == [300_000.0] * 5
    assert {s.signal for s in result.signals} == {Signal.NO_DATA}


def test_round_trip_on_flat_prices_returns_to_capital():
    cal = days(3)
    prices = series_from({"AAA": [50.0] * 3})
    scores = [score("AAA", ny(cal[0], 12), 1.0), score("AAA", ny(cal[1], 12), 0.0)]
    result = run_backtest(config(cal, execution=FREE), prices, scores)
    assert [f.action for f in result.fills] == [Action.OPEN_LONG, Action.CLOSE_LONG]
    assert [f.trading_date for f in result.fills] == [cal[1], cal[2]]
    assert result.equity == [300_000.0] * 3


def test_signal_trades_at_the_next_open():
    cal = days(4)
    prices = series_from({"AAA": [100.0, 110.0, 121.0, 121.0]}, {"AAA": [105.0, 115.0, 121.0, 121.0]})
    scores = [score("AAA", ny(cal[0], 16), 0.8)]  # after Monday's open, decides Tuesday
    result = run_backtest(config(cal, execution=FREE), prices, scores)
    fill = result.fills[0]
    assert (fill.trading_date, fill.price) == (cal[1], 110.0)
    qty = 10_000.0 / 110.0
    assert result.equity[1] == pytest.approx(300_000.0 + qty * (115.0 - 110.0))


def test_article_exactly_at_open_counts_for_the_next_day():
    cal = days(3)
    prices = series_from({"AAA": [10.0] * 3})
    result = run_backtest(config(cal), prices, [score("AAA", ny(cal[1]), 1.0)])
    assert [f.trading_date for f in result.fills] == [cal[2]]
    assert result.lookahead_violations() == []


def test_equity_has_one_point_per_trading_day():
    data = generate_synthetic_dataset(3, SyntheticSpec(n_days=40, n_assets=4))
    result = run_backtest(config(data.calendar, data.universe), data.prices, data.scores)
    assert result.dates == list(data.calendar)
    assert len(result.signals) == 40 * 4


def test_sentiment_positions_stay_open_but_benchmark_liquidates():
    cal = days(3)
    prices = series_from({"AAA": [10.0, 12.0, 15.0]})
    result = run_backtest(config(cal), prices, [score("AAA", ny(cal[0], 12), 1.0)])
    assert [f.action for f in result.fills] == [Action.OPEN_LONG]
    bench = run_backtest(config(cal, strategy="buy_and_hold"), prices)
    assert [f.action for f in bench.fills] == [Action.OPEN_LONG, Action.CLOSE_LONG]
    assert bench.metrics.alpha == 0.0


def test_alpha_is_strategy_minus_benchmark():
    data = generate_synthetic_dataset(5, SyntheticSpec(n_days=60, n_assets=5, correlation=0.5))
    cfg = config(data.calendar, data.universe)
    strat = run_backtest(cfg, data.prices, data.scores)
    bench = run_backtest(cfg.replace(strategy="buy_and_hold"), data.prices)
    assert strat.metrics.alpha == pytest.approx(
        strat.metrics.annual_cumulative_return - bench.metrics.annual_cumulative_return, abs=1e-12)


def test_horizon_errors():
    cal = days(5)
    prices = series_from({"AAA": [10.0] * 5, "BBB": [None, None, None, None, 3.0]})
    with pytest.raises(ValidationError):
        run_backtest(BacktestConfig(cal[4], cal[4] + dt.timedelta(days=3), ("AAA",)), prices)
    with pytest.raises(DataGapError):
        run_backtest(config(cal[:3], ("AAA", "CCC")), prices)
    with pytest.raises(ValidationError):
        BacktestConfig(cal[1], cal[0], ("AAA",))
    with pytest.raises(ValidationError):
        BacktestConfig(cal[0], cal[1], ("AAA", "AAA"))


def test_write_produces_six_files_and_replaces_previous_run(tmp_path):
    data = generate_synthetic_dataset(1, SyntheticSpec(n_days=30, n_assets=3))
    cfg = config(data.calendar, data.universe)
    out = tmp_path / "run"
    out.mkdir()
    (out / "stale.txt").write_text("old")
    run_backtest(cfg, data.prices, data.scores).write(out)
    assert sorted(p.name for p in out.iterdir()) == sorted(RESULT_FILES)
    metrics = json.loads((out / "metrics.json").read_text())
    assert set(metrics["metrics"]) == {k for _, k in mt.TABLE_ROWS}
    assert json.loads((out / "config.json").read_text())["thresholds"] == {"sell": 40.0, "buy": 60.0}
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".")]


def test_outputs_do_not_depend_on_score_order(tmp_path):
    data = generate_synthetic_dataset(2, SyntheticSpec(n_days=30, n_assets=3))
    cfg = config(data.calendar, data.universe)
    run_backtest(cfg, data.prices, data.scores).write(tmp_path / "a")
    run_backtest(cfg, data.prices, data.scores[::-1]).write(tmp_path / "b")
    for name in RESULT_FILES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# -- comparison ----------------------------------------------------------------

@pytest.fixture(scope="module")
def small():
    return generate_synthetic_dataset(8, SyntheticSpec(n_days=60, n_assets=6, correlation=0.3))


def test_comparison_table_and_alpha(small, tmp_path):
    base = config(small.calendar, small.universe)
    variants = [base.replace(name="bh", strategy="buy_and_hold"),
                base.replace(name="s4060"),
                base.replace(name="s4555", thresholds=Thresholds(45, 55)),
                base.replace(name="s3565", thresholds=Thresholds(35, 65))]
    comp = run_comparison(variants, small.prices, small.scores, benchmark="bh", workers=2)
    table = comp.table()
    assert [label for label, _ in table] == [label for label, _ in mt.TABLE_ROWS]
    assert comp.names == ["bh", "s3565", "s4060", "s4555"]
    assert comp.results["bh"].metrics.alpha == 0.0
    solo = run_backtest(base, small.prices, small.scores)
    assert comp.results["s4060"].metrics.alpha == pytest.approx(solo.metrics.alpha, abs=1e-12)
    comp.write(tmp_path / "cmp")
    names = {p.name for p in (tmp_path / "cmp").iterdir()}
    assert {"comparison.csv", "comparison.json", "bh.cumulative.csv", "s4555.monthly.csv"} <= names
    header = (tmp_path / "cmp" / "comparison.csv").read_text().splitlines()[0]
    assert header == "Metrics,bh,s3565,s4060,s4555"


def test_identical_variants_have_zero_alpha(small):
    base = config(small.calendar, small.universe)
    comp = run_comparison([base.replace(name="a"), base.replace(name="b")], small.prices, small.scores, "a")
    assert comp.results["b"].metrics.alpha == 0.0


def test_no_benchmark_leaves_alpha_undefined(small):
    base = config(small.calendar, small.universe)
    comp = run_comparison([base.replace(name="a"), base.replace(name="b", thresholds=Thresholds(30, 70))],
                          small.prices, small.scores)
    assert comp.results["a"].metrics.alpha == mt.Undefined("no-benchmark")


def test_comparison_contract_errors(small):
    base = config(small.calendar, small.universe)
    with pytest.raises(ContractError):
        run_comparison([base.replace(name="a"), base.replace(name="b", end_date=small.calendar[-2])], small.prices)
    with pytest.raises(ContractError):
        run_comparison([base.replace(name="a"), base.replace(name="b", universe=tuple(small.universe[:2]))],
                       small.prices)
    with pytest.raises(ContractError):
        run_comparison([base.replace(name="a"), base.replace(name="a")], small.prices)
    with pytest.raises(ContractError):
        run_comparison([base.replace(name="a"), base.replace(name="b")], small.prices, benchmark="zzz")
    with pytest.raises(ContractError):
        run_comparison([base.replace(name="a"),
                        base.replace(name="b", execution=ExecutionConfig(initial_capital=1e6))], small.prices)


def test_per_variant_scores(small):
    base = config(small.calendar, small.universe)
    comp = run_comparison([base.replace(name="real"), base.replace(name="silent")], small.prices,
                          {"real": small.scores, "silent": []}, benchmark="silent")
    assert comp.results["silent"].fills == []
