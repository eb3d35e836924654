"""Rule-based per-repository classifier.

A contributor with fewer than ``min_comments`` comments is ``unknown``.
Otherwise it is a bot when it uses few patterns relative to its comment
count and those patterns are unevenly used; everything else is human.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

from crowdbot.domain import CommentRecord, FeatureVector, Label, Origin, Prediction
from crowdbot.ingestion import activity_by_contributor
from crowdbot.patterns import DEFAULT_THRESHOLD, compute_features

PREDICTION_HEADER = ["contributor", "repository", "n_comments", "n_patterns", "gini", "prediction"]


@dataclass(frozen=True)
class RuleThresholds:
    min_comments: int = 10
    max_pattern_ratio: float = 0.2
    min_gini: float = 0.3
    pattern_threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if self.min_comments < 1:
            raise ValueError("min_comments must be >= 1")
        if not 0.0 < self.max_pattern_ratio <= 1.0:
            raise ValueError("max_pattern_ratio must be in (0, 1]")
        if not 0.0 <= self.min_gini < 1.0:
            raise ValueError("min_gini must be in [0, 1)")
        if not 0.0 <= self.pattern_threshold <= 1.0:
            raise ValueError("pattern_threshold must be in [0, 1]")


def predict(features: FeatureVector, thresholds: RuleThresholds = RuleThresholds()) -> Label:
    if features.n_comments < thresholds.min_comments:
        return Label.UNKNOWN
    if features.pattern_ratio <= thresholds.max_pattern_ratio and (
        # a single pattern is maximal repetition even though its gini is 0
        features.n_patterns == 1 or features.gini >= thresholds.min_gini
    ):
        return Label.BOT
    return Label.HUMAN


def predict_repository(
    corpus: Iterable[CommentRecord], thresholds: RuleThresholds = RuleThresholds()
) -> list[Prediction]:
    """Predict every contributor of a corpus, one prediction per (contributor, repository).

    Output is sorted by repository then contributor.
    """
    out = []
    for activity in activity_by_contributor(corpus):
        features = compute_features(activity, thresholds.pattern_threshold)
        out.append(
            Prediction(
                contributor=activity.contributor,
                repository=activity.repository,
                label=predict(features, thresholds),
                features=features,
            )
        )
    return out


def _fmt_gini(value) -> str:
    return "" if value is None else f"{value:.6f}"


def format_predictions_csv(predictions: Iterable[Prediction]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PREDICTION_HEADER)
    for p in predictions:
        f = p.features
        writer.writerow([
            p.contributor,
            p.repository,
            "" if f is None else f.n_comments,
            "" if f is None or f.n_patterns is None else f.n_patterns,
            "" if f is None else _fmt_gini(f.gini),
            p.label.value,
        ])
    return buf.getvalue()


def parse_predictions_csv(text: str) -> list[Prediction]:
    """Read either the per-repository or the aggregated prediction CSV."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        return []
    missing = {"contributor", "repository", "prediction"} - set(reader.fieldnames)
    if missing:
        raise ValueError(f"prediction CSV lacks columns: {', '.join(sorted(missing))}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            features = None
            if row.get("n_comments"):
                n = int(row["n_comments"])
                if n == 0:
                    features = FeatureVector(0)
                else:
                    features = FeatureVector.of(n, int(row["n_patterns"]), float(row["gini"]))
            out.append(
                Prediction(
                    contributor=row["contributor"],
                    repository=row["repository"],
                    label=Label.parse(row["prediction"]),
                    origin=Origin.parse(row["origin"]) if row.get("origin") else Origin.OBSERVED,
                    features=features,
                )
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out
