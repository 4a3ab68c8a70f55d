"""Regression metrics for predicted vs ground-truth affinity values.

Pure two-pass implementations over exact (fsum) summation: mean squared
error, coefficient of determination, and Pearson correlation. Values are
compared on whatever scale the inputs carry; no log transform is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .core import normalize_entity
from .errors import DegenerateSeries, IngestError, InvalidEntity, InvalidSeries

__all__ = ["PairedSeries", "mse", "r2", "correlation", "evaluate_files", "load_value_table"]


@dataclass(frozen=True)
class PairedSeries:
    """Aligned predicted/truth value pairs; at least two points, all finite."""

    predicted: tuple[float, ...]
    truth: tuple[float, ...]

    def __post_init__(self):
        predicted = tuple(float(v) for v in self.predicted)
        truth = tuple(float(v) for v in self.truth)
        object.__setattr__(self, "predicted", predicted)
        object.__setattr__(self, "truth", truth)
        if len(predicted) != len(truth):
            raise InvalidSeries(
                f"length mismatch: {len(predicted)} predicted vs {len(truth)} truth"
            )
        if len(predicted) < 2:
            raise InvalidSeries("need at least two paired values")
        if not all(math.isfinite(v) for v in predicted + truth):
            raise InvalidSeries("series contain non-finite values")

    def __len__(self) -> int:
        return len(self.predicted)


def mse(series: PairedSeries) -> float:
    """Mean squared error (1/m) * sum((pred - truth)^2)."""
    m = len(series)
    return math.fsum((p - t) ** 2 for p, t in zip(series.predicted, series.truth)) / m


def _centered_sum_squares(values: Sequence[float]) -> tuple[float, float]:
    mean = math.fsum(values) / len(values)
    return mean, math.fsum((v - mean) ** 2 for v in values)


def r2(series: PairedSeries) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot about the truth mean."""
    if len(set(series.truth)) == 1:
        raise DegenerateSeries("truth series is constant; R^2 is undefined")
    _, ss_tot = _centered_sum_squares(series.truth)
    if ss_tot == 0.0:
        raise DegenerateSeries("truth series has zero variance; R^2 is undefined")
    ss_res = math.fsum((p - t) ** 2 for p, t in zip(series.predicted, series.truth))
    return 1.0 - ss_res / ss_tot


def correlation(series: PairedSeries) -> float:
    """Pearson correlation coefficient, clamped into [-1, 1] against rounding."""
    for name, values in (("predicted", series.predicted), ("truth", series.truth)):
        if len(set(values)) == 1:
            raise DegenerateSeries(f"{name} series is constant; correlation is undefined")
    mean_p, ss_p = _centered_sum_squares(series.predicted)
    mean_t, ss_t = _centered_sum_squares(series.truth)
    if ss_p == 0.0 or ss_t == 0.0:
        raise DegenerateSeries("zero variance; correlation is undefined")
    covariance = math.fsum(
        (p - mean_p) * (t - mean_t) for p, t in zip(series.predicted, series.truth)
    )
    value = covariance / math.sqrt(ss_p * ss_t)
    return max(-1.0, min(1.0, value))


def load_value_table(path: str | Path) -> dict[str, float]:
    """Read an ``id<TAB>value`` TSV keyed by normalized id (last duplicate wins)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read value table {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise IngestError(f"value table {path} is not UTF-8: {exc}") from exc
    values: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 2:
            raise InvalidSeries(f"{path}:{lineno}: expected id<TAB>value")
        try:
            key = normalize_entity(fields[0]).normalized
        except InvalidEntity:
            raise InvalidSeries(f"{path}:{lineno}: empty id") from None
        try:
            values[key] = float(fields[1])
        except ValueError:
            raise InvalidSeries(f"{path}:{lineno}: value {fields[1]!r} is not a number") from None
    return values


def evaluate_files(pred_path: str | Path, truth_path: str | Path) -> dict:
    """Join two id/value tables on id and compute all three metrics.

    Unmatched ids are reported in the result and dropped from the series;
    pairing follows the prediction file's order.
    """
    predicted = load_value_table(pred_path)
    truth = load_value_table(truth_path)
    shared = [key for key in predicted if key in truth]
    unmatched_pred = sorted(key for key in predicted if key not in truth)
    unmatched_truth = sorted(key for key in truth if key not in predicted)
    if len(shared) < 2:
        raise InvalidSeries(
            f"only {len(shared)} ids matched between {pred_path} and {truth_path}; need >= 2"
        )
    series = PairedSeries(
        predicted=tuple(predicted[key] for key in shared),
        truth=tuple(truth[key] for key in shared),
    )
    return {
        "mse": mse(series),
        "r2": r2(series),
        "correlation": correlation(series),
        "pairs_evaluated": len(shared),
        "unmatched_predictions": unmatched_pred,
        "unmatched_truth": unmatched_truth,
    }
