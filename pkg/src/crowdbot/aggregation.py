"""Cross-repository aggregation of per-repository predictions.

``apply_wocp`` gives every contributor its majority non-unknown label in
all the repositories where it was classified; unknown predictions never
vote and are never rewritten. ``complete_unknowns`` optionally turns the
unknown predictions of contributors with enough bot predictions (and no
human ones) into bot predictions.
"""

from __future__ import annotations

import csv
import io
from collections import Counter, OrderedDict, defaultdict
from dataclasses import dataclass, replace
from typing import Iterable, Union

from crowdbot.domain import (
    AggregationConfig,
    ContributorPredictions,
    Label,
    Origin,
    Prediction,
)

AGGREGATED_HEADER = ["contributor", "repository", "prediction", "origin"]

BUCKETS = ("1", "2", "3", "4-5", "6-9", "10+")

STATUSES = (
    "consistent_bot",
    "consistent_human",
    "diverging",
    "incomplete_bot",
    "incomplete_human",
    "all_unknown",
)


class DuplicatePredictionError(ValueError):
    pass


def collect(predictions: Iterable[Prediction]) -> list[ContributorPredictions]:
    """Pivot predictions to one entry per contributor, in first-seen order."""
    per: dict[str, dict[str, Label]] = OrderedDict()
    for p in predictions:
        repos = per.setdefault(p.contributor, {})
        if p.repository in repos:
            raise DuplicatePredictionError(
                f"duplicate prediction for contributor {p.contributor!r} "
                f"in repository {p.repository!r}"
            )
        repos[p.repository] = p.label
    return [ContributorPredictions(c, repos) for c, repos in per.items()]


def bucket_of(n_repositories: int) -> str:
    if n_repositories <= 3:
        return str(n_repositories)
    if n_repositories <= 5:
        return "4-5"
    if n_repositories <= 9:
        return "6-9"
    return "10+"


def repo_multiplicity_histogram(
    entries: Iterable[ContributorPredictions],
) -> dict[str, tuple[int, float]]:
    """Count contributors by the number of repositories they appear in.

    Returns bucket -> (count, percentage of contributors).
    """
    counts = Counter(bucket_of(e.n_repositories) for e in entries if e.n_repositories)
    return histogram_from_counts([counts[b] for b in BUCKETS])


def histogram_from_counts(counts: list[int]) -> dict[str, tuple[int, float]]:
    total = sum(counts)
    return {
        b: (n, 100.0 * n / total if total else 0.0) for b, n in zip(BUCKETS, counts)
    }


def contributor_status(entry: ContributorPredictions) -> str:
    n_bot, n_human, n_unknown = entry.counts
    if n_bot and n_human:
        return "diverging"
    if n_bot:
        return "incomplete_bot" if n_unknown else "consistent_bot"
    if n_human:
        return "incomplete_human" if n_unknown else "consistent_human"
    return "all_unknown"


@dataclass(frozen=True)
class DivergenceReport:
    statuses: dict[str, str]

    @property
    def summary(self) -> dict[str, int]:
        tally = Counter(self.statuses.values())
        return {s: tally[s] for s in STATUSES}


def divergence_report(entries: Iterable[ContributorPredictions]) -> DivergenceReport:
    return DivergenceReport({e.contributor: contributor_status(e) for e in entries})


PredictionsIn = Iterable[Union[Prediction, ContributorPredictions]]


def _as_predictions(items: PredictionsIn) -> list[Prediction]:
    out: list[Prediction] = []
    for item in items:
        if isinstance(item, ContributorPredictions):
            out.extend(
                Prediction(item.contributor, repo, label) for repo, label in item.per_repo.items()
            )
        else:
            out.append(item)
    return out


def _group(predictions: list[Prediction]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = defaultdict(list)
    seen = set()
    for i, p in enumerate(predictions):
        if p.key in seen:
            raise DuplicatePredictionError(
                f"duplicate prediction for contributor {p.contributor!r} "
                f"in repository {p.repository!r}"
            )
        seen.add(p.key)
        groups[p.contributor].append(i)
    return groups


def majority_label(n_bot: int, n_human: int, tie_break: Label = Label.HUMAN) -> Label:
    """Majority of bot/human votes; ``unknown`` when nobody voted."""
    if n_bot == 0 and n_human == 0:
        return Label.UNKNOWN
    if n_bot > n_human:
        return Label.BOT
    if n_human > n_bot:
        return Label.HUMAN
    return tie_break


def apply_wocp(
    items: PredictionsIn, config: AggregationConfig = AggregationConfig()
) -> list[Prediction]:
    """Replace each contributor's minority bot/human predictions by its majority label.

    Accepts predictions or ``ContributorPredictions`` entries and returns
    predictions in input order. Rewritten predictions get origin
    ``woc_flipped``; every other prediction is returned unchanged.
    """
    predictions = _as_predictions(items)
    out = list(predictions)
    for idx in _group(predictions).values():
        tally = Counter(predictions[i].label for i in idx)
        target = majority_label(tally[Label.BOT], tally[Label.HUMAN], config.tie_break)
        if target is Label.UNKNOWN:
            continue
        for i in idx:
            p = predictions[i]
            if p.label is not Label.UNKNOWN and p.label is not target:
                out[i] = replace(p, label=target, origin=Origin.WOC_FLIPPED)
    return out


def observed_label(p: Prediction) -> Label:
    """The label the per-repository classifier originally produced."""
    if p.origin is Origin.WOC_COMPLETED:
        return Label.UNKNOWN
    if p.origin is Origin.WOC_FLIPPED:
        return Label.HUMAN if p.label is Label.BOT else Label.BOT
    return p.label


def revert(items: PredictionsIn) -> list[Prediction]:
    """Undo aggregation, restoring observed labels and origins."""
    return [
        replace(p, label=observed_label(p), origin=Origin.OBSERVED)
        for p in _as_predictions(items)
    ]


def complete_unknowns(
    items: PredictionsIn, config: AggregationConfig = AggregationConfig()
) -> list[Prediction]:
    """Turn unknowns into bots for contributors with >= ``bot_threshold`` bot votes.

    Only contributors without any human prediction are eligible. Votes are
    counted on observed labels, so running after ``apply_wocp`` does not
    widen the eligible population. No-op unless ``config.complete_unknowns``.
    """
    predictions = _as_predictions(items)
    if not config.complete_unknowns:
        return predictions
    out = list(predictions)
    for idx in _group(predictions).values():
        observed = Counter(observed_label(predictions[i]) for i in idx)
        current = Counter(predictions[i].label for i in idx)
        if observed[Label.HUMAN] or current[Label.HUMAN]:
            continue
        if observed[Label.BOT] < config.bot_threshold:
            continue
        for i in idx:
            p = predictions[i]
            if p.label is Label.UNKNOWN:
                out[i] = replace(p, label=Label.BOT, origin=Origin.WOC_COMPLETED)
    return out


def aggregate(
    items: PredictionsIn, config: AggregationConfig = AggregationConfig()
) -> list[Prediction]:
    """Majority vote, then (if enabled) unknown completion."""
    return complete_unknowns(apply_wocp(items, config), config)


def format_aggregated_csv(predictions: Iterable[Prediction]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(AGGREGATED_HEADER)
    for p in predictions:
        writer.writerow([p.contributor, p.repository, p.label.value, p.origin.wire])
    return buf.getvalue()
