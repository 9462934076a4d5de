"""Command-line entry point: ``sentibt {run,compare,sweep,synth}``.

Exit codes: 0 success, 2 usage or configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from functools import lru_cache

from . import __version__
from .config import RunInputs, parse_compare, parse_run, read_json
from .engine import run_backtest, run_comparison
from .errors import ConfigError, ContractError, SentiBTError, ValidationError
from .marketdata import load_prices
from .metrics import TABLE_ROWS, Undefined
from .newsfeed import LexiconScorer, load_aliases, load_articles, load_precomputed_scores, score_articles
from .strategy import threshold_sweep
from .synthetic import SyntheticSpec, generate_synthetic_dataset

log = logging.getLogger("sentibt")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3

DEFAULTS_EPILOG = """\
defaults: SELL_SIGNAL 40 and BUY_SIGNAL 60 (Buy above 60, Sell below 40, Neutral in between),
initial capital $300,000, order value $10,000 per equal-value order, commission 0.05%
of traded value, market open 09:30 America/New_York (override with SENTIBT_DEFAULT_TZ),
252 periods per year, risk-free rate 0."""


class UsageError(SentiBTError):
    pass


@lru_cache(maxsize=8)
def _prices(path: str):
    return load_prices(path)


def _universe_from(path: str):
    _require(path)
    return _prices(path).assets


def _require(*paths: str) -> None:
    for p in paths:
        if p and not os.path.exists(p):
            raise FileNotFoundError(p)


def _scores(run: RunInputs):
    if run.config.strategy != "sentiment":
        return []
    if run.scores:
        return load_precomputed_scores(run.scores)
    articles = load_articles(run.articles)
    aliases = load_aliases(run.aliases)
    aliases.covers(run.config.universe)
    return score_articles(articles, aliases, LexiconScorer(**run.lexicon))


def _load_run(args) -> RunInputs:
    path = args.config
    run = parse_run(read_json(path), os.path.dirname(os.path.abspath(path)), "config", _universe_from)
    _require(*run.paths())
    return run


def cmd_run(args) -> int:
    run = _load_run(args)
    result = run_backtest(run.config, _prices(run.prices), _scores(run))
    result.write(args.out)
    m = result.metrics
    log.info("%s: %d fills, cumulative return %s%%, %d warnings -> %s", run.config.name, len(result.fills),
             _fmt(m.annual_cumulative_return), len(result.warnings), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    path = args.config
    runs, benchmark = parse_compare(read_json(path), os.path.dirname(os.path.abspath(path)), _universe_from)
    if len(runs) < 2:
        raise UsageError("compare needs at least two variants")
    for r in runs:
        _require(*r.paths())
    if len({r.prices for r in runs}) != 1:
        raise ContractError("all variants must read the same price file")
    scores = {r.config.name: _scores(r) for r in runs}
    comparison = run_comparison([r.config for r in runs], _prices(runs[0].prices), scores, benchmark,
                                workers=args.workers)
    comparison.write(args.out)
    for label, cols in comparison.table():
        log.info("%-26s %s", label, "  ".join(f"{n}={_fmt(v)}" for n, v in cols.items()))
    return EXIT_OK


def _parse_pairs(text: str) -> list[tuple[float, float]]:
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            sell, buy = (float(x) for x in chunk.split(":"))
        except ValueError:
            raise UsageError(f"bad threshold pair {chunk!r}; expected SELL:BUY") from None
        pairs.append((sell, buy))
    return pairs


def cmd_sweep(args) -> int:
    run = _load_run(args)
    pairs = _parse_pairs(args.pairs) if args.pairs else run.sweep_pairs
    if not pairs:
        raise UsageError("no threshold pairs given (use --pairs 45:55,40:60,35:65)")
    for sell, buy in pairs:
        if not sell < buy:
            raise ConfigError(f"invalid pair {sell}:{buy}; sell must be below buy")
    try:
        rows = threshold_sweep(run.config.replace(compute_alpha=True), _prices(run.prices), _scores(run), pairs)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    os.makedirs(args.out, exist_ok=True)
    keys = [k for _, k in TABLE_ROWS]
    tmp = os.path.join(args.out, ".sweep.csv.tmp")
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sell_signal", "buy_signal", "transactions", "signals", *keys])
        for r in rows:
            vals = r["metrics"].values()
            w.writerow([repr(r["sell_signal"]), repr(r["buy_signal"]), r["transactions"], r["signals"],
                        *("" if isinstance(vals[k], Undefined) else repr(vals[k]) for k in keys)])
    os.replace(tmp, os.path.join(args.out, "sweep.csv"))
    tmp = os.path.join(args.out, ".sweep.json.tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump([{**{k: v for k, v in r.items() if k != "metrics"}, **r["metrics"].to_dict()} for r in rows],
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, os.path.join(args.out, "sweep.json"))
    for r in rows:
        log.info("sell=%g buy=%g transactions=%d signals=%d", r["sell_signal"], r["buy_signal"],
                 r["transactions"], r["signals"])
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = SyntheticSpec.from_dict(read_json(args.config)) if args.config else SyntheticSpec()
    except (ValidationError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    data = generate_synthetic_dataset(args.seed, spec)
    written = data.write(args.out)
    run = {
        "name": "sentiment",
        "start_date": spec.start_date.isoformat(),
        "end_date": data.calendar[-1].isoformat(),
        "prices": "prices.csv",
        "scores": "scores.csv",
    }
    with open(os.path.join(args.out, "run.json"), "w", encoding="utf-8") as fh:
        json.dump(run, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("wrote %d price rows and %d scores to %s", len(data.prices), len(data.scores), args.out)
    log.debug("files: %s", ", ".join(written))
    return EXIT_OK


def _fmt(v) -> str:
    return "n/a" if isinstance(v, Undefined) else f"{v:.4g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sentibt", description="News-sentiment daily backtester.",
                                     epilog=DEFAULTS_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, metavar="DIR", help="output directory (created if absent)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", "-q", action="store_true", help="only report errors")
    verbosity.add_argument("--verbose", "-v", action="store_true", help="log every skipped order")

    def add(name, help_text, func, config_required=True):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text,
                           epilog=DEFAULTS_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", required=config_required, metavar="PATH", help="JSON config file")
        p.set_defaults(func=func)
        return p

    add("run", "Run one backtest and write config.json, equity.csv, fills.csv, signals.csv, "
               "sentiment.csv and metrics.json.", cmd_run)
    p = add("compare", "Run several variants on shared data; write the metrics table with alpha "
                       "and per-variant cumulative/monthly series.", cmd_compare)
    p.add_argument("--workers", type=int, default=1, help="variants run concurrently (default 1)")
    p = add("sweep", "Re-run a backtest for several (SELL_SIGNAL, BUY_SIGNAL) pairs and count transactions.",
            cmd_sweep)
    p.add_argument("--pairs", metavar="S:B,...", help="threshold pairs, e.g. 45:55,40:60,35:65")
    p = add("synth", "Generate a seeded synthetic price + score dataset.", cmd_synth, config_required=False)
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.ERROR if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    _prices.cache_clear()
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return EXIT_USAGE
    except (ConfigError, ContractError) as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        log.error("data error: input file not found: %s", exc.filename or exc)
        return EXIT_DATA
    except SentiBTError as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
