"""Daily news-sentiment backtesting with a Buy&Hold benchmark and risk metrics."""

__version__ = "0.1.0"

from .aggregation import (AggregationWindow, DailyAssetSentiment, aggregate, aggregate_panel,
                          build_windows)
from .engine import BacktestConfig, BacktestResult, run_backtest, run_comparison
from .errors import (ConfigError, ContractError, DataGapError, DuplicateRecordError, NoPredecessorError,
                     ParseError, ScoringError, SentiBTError, ValidationError)
from .execution import ExecutionConfig, Fill, PortfolioState, execute_day, mark_to_market, run_buy_and_hold
from .marketdata import PriceBar, PriceSeries, TradingCalendar, load_prices, open_price, previous_trading_day
from .metrics import MetricsReport, MetricsSettings, Undefined, compute_report
from .newsfeed import (AliasTable, ArticleAssetScore, LexiconScorer, NewsArticle, label_to_value,
                       load_precomputed_scores, match_assets, score_article_asset)
from .strategy import (BenchmarkMode, NoDataPolicy, OrderLists, Signal, Thresholds, benchmark_plan,
                       build_order_lists, classify, threshold_sweep)
from .synthetic import SyntheticSpec, generate_synthetic_dataset
