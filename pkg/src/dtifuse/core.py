"""Shared domain types, entity-name normalization and configuration.

All types here are immutable after construction and safe to share across
threads. Entity matching throughout the package is lexical: names are
trimmed and case-folded, nothing more. Brand/generic drug synonyms are NOT
unified -- "Hycamtin" and "Topotecan" stay distinct entities.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidEntity, InvalidWeights
from .fusion import WeightVector, merge_with_weights, validate_alpha_beta

__all__ = [
    "EntityId",
    "DrugRecord",
    "TargetRecord",
    "FusionConfig",
    "ScoreBundle",
    "normalize_entity",
    "load_fusion_config",
    "DEFAULT_POSITIVE_KEYWORDS",
    "DEFAULT_STRONG_KEYWORDS",
]

# Interaction-evidence keyword defaults used by the search scorer.
DEFAULT_POSITIVE_KEYWORDS = ("interacts", "binds", "activates", "inhibits", "modulates")
DEFAULT_STRONG_KEYWORDS = ("strong", "significant", "potent", "effective")

DEFAULT_ALPHA = 0.3
DEFAULT_BETA = 0.3
DEFAULT_SEARCH_RESULT_COUNT = 10

ALPHA_ENV_VAR = "DTIFUSE_ALPHA"
BETA_ENV_VAR = "DTIFUSE_BETA"


@dataclass(frozen=True)
class EntityId:
    """A drug or target name.

    ``raw`` keeps the original casing with outer whitespace removed (used
    for display and query formulation); ``normalized`` is the trimmed,
    case-folded form used for all matching.
    """

    raw: str
    normalized: str


def normalize_entity(raw: str) -> EntityId:
    """Normalize an entity name: trim outer whitespace, case-fold.

    Normalizing is idempotent: feeding a normalized name back in returns
    the same normalized form.

    Raises:
        InvalidEntity: if the name is empty after trimming.
    """
    if not isinstance(raw, str):
        raise InvalidEntity(f"entity name must be a string, got {type(raw).__name__}")
    trimmed = raw.strip()
    if not trimmed:
        raise InvalidEntity("entity name is empty after trimming")
    return EntityId(raw=trimmed, normalized=trimmed.casefold())


@dataclass(frozen=True)
class DrugRecord:
    """A drug with its SMILES structure string (not validated chemically)."""

    id: EntityId
    structure: str


@dataclass(frozen=True)
class TargetRecord:
    """A protein target with its amino-acid sequence."""

    id: EntityId
    sequence: str

    def __post_init__(self):
        if self.sequence and not self.sequence.isalpha():
            raise ValueError(
                f"target sequence for {self.id.raw!r} contains non-letter characters"
            )


@dataclass(frozen=True)
class FusionConfig:
    """Weights and search settings shared by the scorers.

    alpha weighs the ML score, beta the search score; the knowledge-graph
    score gets the remaining 1 - alpha - beta. All three must stay in the
    open constraint region (0 < alpha < 1, 0 < beta < 1, alpha + beta < 1).
    """

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    search_result_count: int = DEFAULT_SEARCH_RESULT_COUNT
    positive_keywords: tuple[str, ...] = DEFAULT_POSITIVE_KEYWORDS
    strong_keywords: tuple[str, ...] = DEFAULT_STRONG_KEYWORDS

    def __post_init__(self):
        validate_alpha_beta(self.alpha, self.beta)
        if not isinstance(self.search_result_count, int) or self.search_result_count < 1:
            raise ValueError(
                f"search_result_count must be a positive integer, got {self.search_result_count!r}"
            )
        object.__setattr__(self, "positive_keywords", tuple(self.positive_keywords))
        object.__setattr__(self, "strong_keywords", tuple(self.strong_keywords))
        if not self.positive_keywords:
            raise ValueError("positive_keywords must not be empty")
        if not self.strong_keywords:
            raise ValueError("strong_keywords must not be empty")

    def weights(self) -> WeightVector:
        return WeightVector.from_alpha_beta(self.alpha, self.beta)


# Merged score must reproduce the convex combination to this tolerance.
MERGE_CONSISTENCY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ScoreBundle:
    """The three component scores plus their merged value and the weights used."""

    ml: float
    search: float
    kg: float
    merged: float
    weights_used: WeightVector

    def __post_init__(self):
        expected = merge_with_weights(self.ml, self.search, self.kg, self.weights_used)
        if not math.isfinite(self.merged) or abs(self.merged - expected) > MERGE_CONSISTENCY_TOLERANCE:
            raise ValueError(
                f"merged score {self.merged!r} does not match the recorded weights "
                f"(expected {expected!r})"
            )

    def contributions(self) -> dict[str, float]:
        """Per-agent contribution terms weight*score of the merged value."""
        return {
            "ml": self.weights_used.ml * self.ml,
            "search": self.weights_used.search * self.search,
            "kg": self.weights_used.kg * self.kg,
        }


def _parse_keyword_list(value: str) -> tuple[str, ...]:
    return tuple(item.strip() for item in value.split(",") if item.strip())


def load_fusion_config(
    path: str | Path | None = None,
    env: dict[str, str] | None = None,
    overrides: dict[str, float] | None = None,
) -> FusionConfig:
    """Load a FusionConfig from a key/value file plus environment overrides.

    The file holds one ``key = value`` pair per line; ``#`` starts a
    comment and blank lines are ignored. Recognized keys: alpha, beta,
    search_result_count, positive_keywords, strong_keywords (keyword lists
    are comma-separated). DTIFUSE_ALPHA / DTIFUSE_BETA environment
    variables override the file values, and ``overrides`` (alpha/beta from
    CLI flags) wins over both; constraints are validated once, on the final
    values.
    """
    values: dict[str, str] = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = stripped.partition("=")
            values[key.strip()] = value.strip()

    known = {"alpha", "beta", "search_result_count", "positive_keywords", "strong_keywords"}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")

    if env is None:
        env = dict(os.environ)
    if env.get(ALPHA_ENV_VAR):
        values["alpha"] = env[ALPHA_ENV_VAR]
    if env.get(BETA_ENV_VAR):
        values["beta"] = env[BETA_ENV_VAR]

    kwargs: dict = {}
    try:
        if "alpha" in values:
            kwargs["alpha"] = float(values["alpha"])
        if "beta" in values:
            kwargs["beta"] = float(values["beta"])
    except ValueError as exc:
        raise InvalidWeights(f"alpha/beta must be numeric: {exc}") from None
    for key, value in (overrides or {}).items():
        if key not in ("alpha", "beta"):
            raise ValueError(f"only alpha/beta may be overridden, got {key!r}")
        if value is not None:
            kwargs[key] = float(value)
    if "search_result_count" in values:
        try:
            kwargs["search_result_count"] = int(values["search_result_count"])
        except ValueError:
            raise ValueError(
                f"search_result_count must be an integer, got {values['search_result_count']!r}"
            ) from None
    if "positive_keywords" in values:
        kwargs["positive_keywords"] = _parse_keyword_list(values["positive_keywords"])
    if "strong_keywords" in values:
        kwargs["strong_keywords"] = _parse_keyword_list(values["strong_keywords"])

    return FusionConfig(**kwargs)
