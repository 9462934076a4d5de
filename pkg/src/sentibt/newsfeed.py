"""Article ingestion, alias-based asset matching and per-article scoring.

Each article yields at most one :class:`ArticleAssetScore` per asset: the
mean of the sentence-level values of every sentence that mentions the asset.
Sentence scorers are plain callables returning either a class label
(``"negative"``, ``"neutral"``, ``"positive"``) or a float in ``[-1, 1]``.

The title, when present, is addressed as sentence index ``-1`` so that
headline-only mentions still count.
"""
from __future__ import annotations

import csv
import datetime as dt
import json
import math
import os
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, Union

from .errors import ConfigError, DuplicateRecordError, ParseError, ScoringError, ValidationError

LABEL_VALUES = {"negative": -1.0, "neutral": 0.0, "positive": 1.0}
TITLE_INDEX = -1

_SENTENCE_END = re.compile(r"(?<=[.!?])(?:\s+|$)")


def split_sentences(text: str) -> list[str]:
    """Split on ``.``, ``!`` or ``?`` followed by whitespace or end of text."""
    return [s.strip() for s in _SENTENCE_END.split(text) if s and s.strip()]


def parse_timestamp(text: str) -> dt.datetime:
    """ISO-8601 timestamp to an aware UTC datetime; naive input is taken as UTC."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = dt.datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=dt.timezone.utc)
    return ts.astimezone(dt.timezone.utc)


def format_timestamp(ts: dt.datetime) -> str:
    return ts.astimezone(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class NewsArticle:
    article_id: str
    source: str
    timestamp: dt.datetime
    title: str
    sentences: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.sentences and not self.title.strip():
            raise ValidationError(f"article {self.article_id}: empty title and body")
        if self.timestamp.tzinfo is None:
            raise ValidationError(f"article {self.article_id}: timestamp must be timezone-aware")

    def sentence(self, index: int) -> str:
        return self.title if index == TITLE_INDEX else self.sentences[index]


class AliasTable:
    """Case-insensitive surface forms per asset, matched as whole words."""

    def __init__(self, aliases: Mapping[str, Iterable[str]]):
        table: dict[str, frozenset[str]] = {}
        for asset, forms in aliases.items():
            forms = frozenset(f.strip() for f in forms)
            if not forms:
                raise ValidationError(f"asset {asset} has no aliases")
            if any(not f for f in forms):
                raise ValidationError(f"asset {asset} has an empty alias")
            table[asset] = forms
        self._table = dict(sorted(table.items()))
        self._patterns = {
            asset: re.compile(
                "|".join(rf"(?<!\w){re.escape(f)}(?!\w)" for f in sorted(forms, key=lambda s: (-len(s), s))),
                re.IGNORECASE,
            )
            for asset, forms in self._table.items()
        }

    @property
    def assets(self) -> list[str]:
        return list(self._table)

    def aliases(self, asset: str) -> frozenset[str]:
        return self._table[asset]

    def pattern(self, asset: str) -> re.Pattern:
        return self._patterns[asset]

    def __len__(self) -> int:
        return len(self._table)

    def covers(self, universe: Iterable[str]) -> None:
        missing = sorted(set(universe) - set(self._table))
        if missing:
            raise ValidationError(f"assets without aliases: {', '.join(missing)}")


@dataclass(frozen=True)
class AssetMention:
    article_id: str
    asset_id: str
    sentence_indices: tuple[int, ...]

    def __post_init__(self):
        idx = self.sentence_indices
        if not idx or list(idx) != sorted(set(idx)):
            raise ValidationError(f"mention {self.article_id}/{self.asset_id}: indices must be non-empty, sorted, unique")


@dataclass(frozen=True)
class ArticleAssetScore:
    article_id: str
    asset_id: str
    score: float
    timestamp: dt.datetime

    def __post_init__(self):
        if not -1.0 <= self.score <= 1.0:
            raise ValidationError(f"score {self.score} for {self.article_id}/{self.asset_id} outside [-1, 1]")


SentenceValue = Union[str, float]


class SentenceScorer(Protocol):
    def __call__(self, sentence: str) -> SentenceValue: ...


def label_to_value(label: str) -> float:
    try:
        return LABEL_VALUES[label.strip().lower()]
    except (KeyError, AttributeError):
        raise ConfigError(f"unknown sentiment label {label!r}; expected one of {sorted(LABEL_VALUES)}") from None


def merge_order(score: ArticleAssetScore):
    """Canonical ordering key: timestamp, then article_id, then asset_id."""
    return (score.timestamp, score.article_id, score.asset_id)


def _to_value(raw: SentenceValue) -> float:
    if isinstance(raw, str):
        return label_to_value(raw)
    value = float(raw)
    if not -1.0 <= value <= 1.0:
        raise ValueError(f"sentence score {value} outside [-1, 1]")
    return value


_WORD = re.compile(r"[A-Za-z']+")

DEFAULT_POSITIVE = (
    "beat", "beats", "bullish", "gain", "gains", "growth", "improve", "improved", "outperform",
    "profit", "profits", "rally", "rallies", "record", "rise", "rises", "rose", "strong", "surge",
    "surged", "up", "upgrade", "upgraded",
)
DEFAULT_NEGATIVE = (
    "bearish", "cut", "cuts", "decline", "declined", "down", "downgrade", "downgraded", "drop",
    "dropped", "fall", "falls", "fell", "lawsuit", "loss", "losses", "miss", "misses", "plunge",
    "plunged", "slump", "weak",
)


class LexiconScorer:
    """Word-count baseline: ``(pos - neg) / max(1, pos + neg)`` per sentence.

    With ``as_labels=True`` the sign of that value is reported as a class
    label instead, which mimics a three-class classifier.
    """

    def __init__(self, positive: Iterable[str] = DEFAULT_POSITIVE,
                 negative: Iterable[str] = DEFAULT_NEGATIVE, as_labels: bool = False):
        self.positive = frozenset(w.lower() for w in positive)
        self.negative = frozenset(w.lower() for w in negative)
        overlap = self.positive & self.negative
        if overlap:
            raise ConfigError(f"words in both lexicons: {sorted(overlap)}")
        self.as_labels = as_labels

    def __call__(self, sentence: str) -> SentenceValue:
        pos = neg = 0
        for w in _WORD.findall(sentence.lower()):
            if w in self.positive:
                pos += 1
            elif w in self.negative:
                neg += 1
        value = (pos - neg) / max(1, pos + neg)
        if self.as_labels:
            return "positive" if value > 0 else "negative" if value < 0 else "neutral"
        return value


def match_assets(article: NewsArticle, aliases: AliasTable) -> list[AssetMention]:
    indexed = list(enumerate(article.sentences))
    if article.title.strip():
        indexed.insert(0, (TITLE_INDEX, article.title))
    mentions = []
    for asset in aliases.assets:
        pattern = aliases.pattern(asset)
        hits = tuple(i for i, text in indexed if pattern.search(text))
        if hits:
            mentions.append(AssetMention(article.article_id, asset, hits))
    return mentions


def score_article_asset(mention: AssetMention, article: NewsArticle,
                        scorer: SentenceScorer) -> ArticleAssetScore:
    values = []
    for i in mention.sentence_indices:
        if i != TITLE_INDEX and not 0 <= i < len(article.sentences):
            raise ScoringError(f"article {article.article_id}: sentence index {i} out of range")
        try:
            values.append(_to_value(scorer(article.sentence(i))))
        except Exception as exc:  # scorer plugins may raise anything
            raise ScoringError(f"article {article.article_id}, sentence {i}: {exc}") from exc
    mean = math.fsum(values) / len(values)
    return ArticleAssetScore(article.article_id, mention.asset_id, min(1.0, max(-1.0, mean)),
                             article.timestamp)


def score_articles(articles: Iterable[NewsArticle], aliases: AliasTable,
                   scorer: SentenceScorer) -> list[ArticleAssetScore]:
    """Score every (article, mentioned asset) pair, ordered by (timestamp, article_id)."""
    seen: set[str] = set()
    out = []
    for article in articles:
        if article.article_id in seen:
            raise DuplicateRecordError(f"duplicate article id {article.article_id}")
        seen.add(article.article_id)
        for mention in match_assets(article, aliases):
            out.append(score_article_asset(mention, article, scorer))
    out.sort(key=merge_order)
    return out


def load_articles(source: str | os.PathLike) -> list[NewsArticle]:
    """Read JSON Lines articles with keys id, source, timestamp, title and body or sentences."""
    source = os.fspath(source)
    articles = []
    with open(source, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if "sentences" in obj:
                    sentences = obj["sentences"]
                    if not isinstance(sentences, list) or not all(isinstance(s, str) for s in sentences):
                        raise ValueError("'sentences' must be an array of strings")
                else:
                    sentences = split_sentences(obj.get("body", ""))
                articles.append(NewsArticle(
                    article_id=str(obj["id"]),
                    source=str(obj.get("source", "")),
                    timestamp=parse_timestamp(obj["timestamp"]),
                    title=str(obj.get("title", "")),
                    sentences=tuple(sentences),
                ))
            except KeyError as exc:
                raise ParseError(f"missing key {exc.args[0]!r}", line_no, source) from None
            except (ValueError, TypeError, ValidationError) as exc:
                raise ParseError(str(exc), line_no, source) from None
    return articles


def write_articles(articles: Iterable[NewsArticle], dest: str | os.PathLike) -> None:
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        for a in articles:
            fh.write(json.dumps({
                "id": a.article_id, "source": a.source, "timestamp": format_timestamp(a.timestamp),
                "title": a.title, "sentences": list(a.sentences),
            }, sort_keys=True) + "\n")


def load_aliases(source: str | os.PathLike) -> AliasTable:
    """Read an alias CSV with header ``asset_id,alias``."""
    source = os.fspath(source)
    table: dict[str, set[str]] = {}
    with open(source, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["asset_id", "alias"]:
            raise ParseError("header must be asset_id,alias", 1, source)
        for row in reader:
            if not row:
                continue
            if len(row) != 2 or not row[0].strip() or not row[1].strip():
                raise ParseError("expected non-empty asset_id,alias", reader.line_num, source)
            table.setdefault(row[0].strip(), set()).add(row[1].strip())
    return AliasTable(table)


SCORE_COLUMNS = ("article_id", "asset_id", "timestamp", "score")


def load_precomputed_scores(source: str | os.PathLike) -> list[ArticleAssetScore]:
    """Read ``article_id,asset_id,timestamp,score`` rows.

    ``score`` is a real in ``[-1, 1]`` or one of the three class labels.
    Records come back ordered by timestamp, ties broken by article_id.
    """
    source = os.fspath(source)
    records = []
    seen: set[tuple[str, str]] = set()
    with open(source, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SCORE_COLUMNS:
            raise ParseError(f"header must be {','.join(SCORE_COLUMNS)}", 1, source)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", line, source)
            article_id, asset_id, ts_text, score_text = (x.strip() for x in row)
            try:
                ts = parse_timestamp(ts_text)
            except ValueError:
                raise ParseError(f"bad timestamp {ts_text!r}", line, source) from None
            try:
                value = float(score_text)
            except ValueError:
                try:
                    value = label_to_value(score_text)
                except ConfigError:
                    raise ParseError(f"bad score {score_text!r}", line, source) from None
            if not -1.0 <= value <= 1.0:
                raise ValidationError(f"{source}:{line}: score {value} outside [-1, 1]")
            key = (article_id, asset_id)
            if key in seen:
                raise DuplicateRecordError(f"{source}:{line}: duplicate record for article {article_id}, asset {asset_id}")
            seen.add(key)
            records.append(ArticleAssetScore(article_id, asset_id, value, ts))
    records.sort(key=merge_order)
    return records


def write_scores(scores: Iterable[ArticleAssetScore], dest: str | os.PathLike) -> None:
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORE_COLUMNS)
        for s in scores:
            writer.writerow([s.article_id, s.asset_id, format_timestamp(s.timestamp), repr(s.score)])
