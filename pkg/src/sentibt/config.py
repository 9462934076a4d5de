"""Strict JSON run configuration.

A run config is a single JSON object. Unknown keys are rejected. Relative
input paths resolve against the config file's directory. Example::

    {
      "name": "roberta",
      "strategy": "sentiment",
      "start_date": "2020-01-01",
      "end_date": "2022-04-30",
      "prices": "prices.csv",
      "scores": "scores.csv",
      "thresholds": {"sell": 40, "buy": 60},
      "execution": {"initial_capital": 300000, "order_value": 10000, "commission_rate": 0.0005}
    }

A comparison config holds ``defaults`` (any run keys), a list of
``variants`` (run keys overriding the defaults, each with a unique
``name``) and an optional ``benchmark`` variant name.
"""
from __future__ import annotations

import datetime as dt
import json
import os
from dataclasses import dataclass, field

from .engine import STRATEGIES, BacktestConfig
from .errors import ConfigError, ValidationError
from .execution import ExecutionConfig
from .metrics import MetricsSettings
from .strategy import Thresholds

RUN_KEYS = {
    "name", "strategy", "start_date", "end_date", "universe", "prices", "scores", "articles",
    "aliases", "scorer", "lexicon", "thresholds", "no_data_policy", "execution", "benchmark_mode",
    "metrics", "market", "window_start", "seed", "compute_alpha", "sweep_pairs",
}
NESTED_KEYS = {
    "thresholds": {"sell", "buy"},
    "execution": {"initial_capital", "order_value", "commission_rate", "allow_fractional_shares",
                  "insufficient_cash_policy", "benchmark_exit_commission"},
    "metrics": {"periods_per_year", "risk_free", "var_method", "var_confidence", "days_per_year"},
    "market": {"open_time", "timezone"},
    "lexicon": {"positive", "negative", "as_labels"},
}
COMPARE_KEYS = {"defaults", "variants", "benchmark"}


@dataclass
class RunInputs:
    """A parsed run: engine config plus the input files it reads."""

    config: BacktestConfig
    prices: str
    scores: str | None = None
    articles: str | None = None
    aliases: str | None = None
    lexicon: dict = field(default_factory=dict)
    sweep_pairs: list[tuple[float, float]] = field(default_factory=list)

    def paths(self) -> list[str]:
        return [p for p in (self.prices, self.scores, self.articles, self.aliases) if p]


def read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def _check_keys(obj, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(repr(k) for k in unknown)}")


def _date(value, where: str) -> dt.date:
    try:
        return dt.date.fromisoformat(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a YYYY-MM-DD date, got {value!r}") from None


def _resolve(path, base_dir: str, where: str) -> str:
    if not isinstance(path, str) or not path:
        raise ConfigError(f"{where}: expected a file path")
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base_dir, path))


def merge(defaults: dict, override: dict) -> dict:
    """Shallow merge with one extra level for the nested sections."""
    out = dict(defaults)
    for k, v in override.items():
        if k in NESTED_KEYS and isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


def parse_run(data: dict, base_dir: str = ".", where: str = "config",
              universe_from=None) -> RunInputs:
    """Validate a run object and build its :class:`RunInputs`.

    ``universe_from`` is called with the prices path when the config omits
    ``universe``; it should return the assets in that file.
    """
    _check_keys(data, RUN_KEYS, where)
    for key, allowed in NESTED_KEYS.items():
        if key in data:
            _check_keys(data[key], allowed, f"{where}.{key}")
    for key in ("start_date", "end_date", "prices"):
        if key not in data:
            raise ConfigError(f"{where}: missing required key {key!r}")
    strategy = data.get("strategy", "sentiment")
    if strategy not in STRATEGIES:
        raise ConfigError(f"{where}.strategy: expected one of {STRATEGIES}, got {strategy!r}")
    scorer = data.get("scorer", "lexicon" if "articles" in data and "scores" not in data else "precomputed")
    prices = _resolve(data["prices"], base_dir, f"{where}.prices")
    scores = articles = aliases = None
    if strategy == "sentiment":
        if scorer == "precomputed":
            if "scores" not in data:
                raise ConfigError(f"{where}: scorer 'precomputed' needs 'scores'")
            scores = _resolve(data["scores"], base_dir, f"{where}.scores")
        elif scorer == "lexicon":
            if "articles" not in data or "aliases" not in data:
                raise ConfigError(f"{where}: scorer 'lexicon' needs 'articles' and 'aliases'")
            articles = _resolve(data["articles"], base_dir, f"{where}.articles")
            aliases = _resolve(data["aliases"], base_dir, f"{where}.aliases")
        else:
            raise ConfigError(f"{where}.scorer: expected 'precomputed' or 'lexicon', got {scorer!r}")

    universe = data.get("universe")
    if universe is None:
        universe = universe_from(prices) if universe_from else None
        if universe is None:
            raise ConfigError(f"{where}: missing 'universe'")
    if not isinstance(universe, list) or not all(isinstance(a, str) for a in universe):
        raise ConfigError(f"{where}.universe: expected a list of tickers")

    th = data.get("thresholds", {})
    ex = data.get("execution", {})
    me = data.get("metrics", {})
    mk = data.get("market", {})
    try:
        open_time = dt.time.fromisoformat(mk["open_time"]) if "open_time" in mk else None
        window_start = dt.datetime.fromisoformat(data["window_start"]) if data.get("window_start") else None
        kwargs = {}
        if open_time is not None:
            kwargs["market_open"] = open_time
        if "timezone" in mk:
            kwargs["timezone"] = mk["timezone"]
        config = BacktestConfig(
            start_date=_date(data["start_date"], f"{where}.start_date"),
            end_date=_date(data["end_date"], f"{where}.end_date"),
            universe=tuple(universe),
            name=str(data.get("name", strategy)),
            strategy=strategy,
            thresholds=Thresholds(float(th.get("sell", 40.0)), float(th.get("buy", 60.0))),
            no_data_policy=data.get("no_data_policy", "hold"),
            execution=ExecutionConfig(**ex),
            scorer=scorer,
            benchmark_mode=data.get("benchmark_mode", "equal-value"),
            metrics=MetricsSettings(**me),
            window_start=window_start,
            seed=data.get("seed"),
            compute_alpha=bool(data.get("compute_alpha", True)),
            **kwargs,
        )
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except (ValidationError, ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    try:
        from zoneinfo import ZoneInfo
        ZoneInfo(config.timezone)
    except Exception:
        raise ConfigError(f"{where}.market.timezone: unknown timezone {config.timezone!r}") from None

    pairs = []
    for i, pair in enumerate(data.get("sweep_pairs", [])):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError(f"{where}.sweep_pairs[{i}]: expected [sell, buy]")
        pairs.append((float(pair[0]), float(pair[1])))
    lexicon = data.get("lexicon", {})
    return RunInputs(config, prices, scores, articles, aliases, lexicon, pairs)


def parse_compare(data: dict, base_dir: str = ".", universe_from=None) -> tuple[list[RunInputs], str | None]:
    _check_keys(data, COMPARE_KEYS, "compare")
    variants = data.get("variants")
    if not isinstance(variants, list):
        raise ConfigError("compare.variants: expected a list")
    defaults = data.get("defaults", {})
    if not isinstance(defaults, dict):
        raise ConfigError("compare.defaults: expected an object")
    runs = []
    for i, v in enumerate(variants):
        if not isinstance(v, dict) or "name" not in v:
            raise ConfigError(f"compare.variants[{i}]: each variant needs a 'name'")
        runs.append(parse_run(merge(defaults, v), base_dir, f"variants[{i}]", universe_from))
    benchmark = data.get("benchmark")
    if benchmark is not None and not isinstance(benchmark, str):
        raise ConfigError("compare.benchmark: expected a variant name")
    return runs, benchmark
