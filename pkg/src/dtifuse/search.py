"""Literature-evidence scoring over retrieved search-result records.

Each record (title, link, snippet) earns 0-3 points from three indicator
checks over the case-folded concatenation of title and snippet:

    +1 if both the drug name and the target name appear,
    +1 if any positive keyword appears (interacts, binds, ...),
    +1 if any strong keyword appears (strong, significant, ...).

Matching is plain substring containment, so "strong" inside "strongly"
counts. With per-result scores S_i over n results, the total T = sum(S_i)
is normalized by the maximum M = 3n and reported as round(T/M, 2) using
exact decimal half-away-from-zero rounding (an empty result set scores 0).

Retrieval is pluggable. The default backend reads a local JSON corpus
keyed by query string, which keeps every pipeline run deterministic and
network-free; an HTTP backend with the same interface is available for
live deployments.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .core import EntityId, FusionConfig
from .errors import RetrievalError

__all__ = [
    "SearchResultRecord",
    "SearchScoreBreakdown",
    "formulate_query",
    "score_result",
    "search_dti_score",
    "round_ratio",
    "SearchBackend",
    "CorpusSearchBackend",
    "HttpSearchBackend",
    "write_corpus",
]

MAX_SCORE_PER_RESULT = 3


@dataclass(frozen=True)
class SearchResultRecord:
    """One retrieved document stub."""

    title: str = ""
    link: str = ""
    snippet: str = ""

    def is_scorable(self) -> bool:
        return bool(self.title or self.snippet)


@dataclass(frozen=True)
class SearchScoreBreakdown:
    """Per-result indicator scores plus the normalized total."""

    per_result: tuple[int, ...]
    total: int
    max_possible: int
    dti_score: float

    def __post_init__(self):
        if self.total != sum(self.per_result):
            raise ValueError("total does not equal the sum of per-result scores")
        if self.max_possible != MAX_SCORE_PER_RESULT * len(self.per_result):
            raise ValueError("max_possible must be 3 * number of results")
        expected = round_ratio(self.total, self.max_possible)
        if self.dti_score != expected:
            raise ValueError(f"dti_score {self.dti_score!r} should be {expected!r}")


def formulate_query(drug: EntityId, target: EntityId) -> str:
    """Build the retrieval query from the display names: "<drug> <target> interaction"."""
    return f"{drug.raw} {target.raw} interaction"


def score_result(
    record: SearchResultRecord, drug: EntityId, target: EntityId, config: FusionConfig
) -> int:
    """Score one record 0-3 by the three evidence indicators."""
    haystack = f"{record.title} {record.snippet}".casefold()
    score = 0
    if drug.normalized in haystack and target.normalized in haystack:
        score += 1
    if any(keyword.casefold() in haystack for keyword in config.positive_keywords):
        score += 1
    if any(keyword.casefold() in haystack for keyword in config.strong_keywords):
        score += 1
    return score


def round_ratio(total: int, max_possible: int) -> float:
    """round(total/max_possible, 2) with exact half-away-from-zero rounding.

    Computed in rational arithmetic so ties at the half-cent (e.g. 1/8 =
    0.125 -> 0.13) round identically on every platform. Returns 0.0 when
    max_possible is 0.
    """
    if max_possible == 0:
        return 0.0
    scaled = Fraction(total, max_possible) * 100
    if scaled >= 0:
        cents = math.floor(scaled + Fraction(1, 2))
    else:
        cents = math.ceil(scaled - Fraction(1, 2))
    return cents / 100.0


def search_dti_score(
    results: Sequence[SearchResultRecord],
    drug: EntityId,
    target: EntityId,
    config: FusionConfig,
) -> SearchScoreBreakdown:
    """Aggregate per-result scores into the normalized search evidence score."""
    per_result = tuple(score_result(record, drug, target, config) for record in results)
    total = sum(per_result)
    max_possible = MAX_SCORE_PER_RESULT * len(per_result)
    return SearchScoreBreakdown(
        per_result=per_result,
        total=total,
        max_possible=max_possible,
        dti_score=round_ratio(total, max_possible),
    )


class SearchBackend(ABC):
    """Source of search-result records for a query string."""

    @abstractmethod
    def fetch_results(self, query: str, n: int) -> list[SearchResultRecord]:
        """Return at most n records for the query.

        An unknown query yields an empty list (scored as 0, not an error);
        a broken result source raises RetrievalError.
        """


def _records_from_json(items, origin: str) -> list[SearchResultRecord]:
    records = []
    for item in items:
        if not isinstance(item, dict):
            raise RetrievalError(f"{origin}: result entries must be objects, got {type(item).__name__}")
        records.append(
            SearchResultRecord(
                title=str(item.get("title", "")),
                link=str(item.get("link", "")),
                snippet=str(item.get("snippet", "")),
            )
        )
    return records


class CorpusSearchBackend(SearchBackend):
    """Reads results from a local corpus file.

    The corpus is UTF-8 JSON: ``{"queries": {"<query>": [{"title": ...,
    "link": ..., "snippet": ...}, ...]}}``. Lookup is by exact query
    string. Constructing the backend with no path serves an empty corpus.
    """

    def __init__(self, path: str | Path | None = None):
        self._queries: dict[str, list[SearchResultRecord]] = {}
        self._path = Path(path) if path is not None else None
        if self._path is not None:
            self._load(self._path)

    def _load(self, path: Path) -> None:
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise RetrievalError(f"cannot read corpus {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise RetrievalError(f"corpus {path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("queries"), dict):
            raise RetrievalError(f'corpus {path} must be an object with a "queries" mapping')
        for query, items in payload["queries"].items():
            if not isinstance(items, list):
                raise RetrievalError(f"corpus {path}: results for {query!r} must be an array")
            self._queries[query] = _records_from_json(items, origin=str(path))

    def fetch_results(self, query: str, n: int) -> list[SearchResultRecord]:
        if n < 1:
            raise ValueError(f"result count must be >= 1, got {n}")
        return list(self._queries.get(query, ())[:n])


def write_corpus(path: str | Path, queries: dict[str, Iterable[SearchResultRecord]]) -> None:
    """Serialize records into the corpus JSON format (helper for fixtures/tools)."""
    payload = {
        "queries": {
            query: [
                {"title": r.title, "link": r.link, "snippet": r.snippet} for r in records
            ]
            for query, records in queries.items()
        }
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


class HttpSearchBackend(SearchBackend):
    """Fetches results from an HTTP endpoint with the corpus record schema.

    Issues ``GET <url>?q=<query>&n=<n>`` and expects a JSON array of
    ``{"title", "link", "snippet"}`` objects. Intended for live
    deployments; the deterministic test suite uses the corpus backend.
    """

    def __init__(self, url: str, *, timeout: float = 10.0, client=None):
        import httpx

        self._url = url
        self._client = client or httpx.Client(timeout=timeout)

    def fetch_results(self, query: str, n: int) -> list[SearchResultRecord]:
        import httpx

        if n < 1:
            raise ValueError(f"result count must be >= 1, got {n}")
        try:
            response = self._client.get(self._url, params={"q": query, "n": n})
        except httpx.HTTPError as exc:
            raise RetrievalError(f"search request failed: {exc}") from exc
        if response.status_code != 200:
            raise RetrievalError(f"search endpoint returned HTTP {response.status_code}")
        try:
            items = response.json()
        except ValueError as exc:
            raise RetrievalError(f"search endpoint returned invalid JSON: {exc}") from exc
        if not isinstance(items, list):
            raise RetrievalError("search endpoint must return a JSON array")
        return _records_from_json(items, origin=self._url)[:n]
