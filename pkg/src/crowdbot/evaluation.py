"""Scoring prediction sets against ground truth (bot is the positive class)."""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Optional

from crowdbot.aggregation import majority_label
from crowdbot.domain import (
    ConfusionMatrix,
    ContributorPredictions,
    GroundTruth,
    Label,
    Prediction,
)

SCATTER_HEADER = ["contributor", "n_bot", "n_human", "n_unknown", "actual"]
TABLE_COLUMNS = ["TP", "TN", "FP", "FN", "Acc", "Prec", "Recall", "F1"]


class MissingTruthError(ValueError):
    def __init__(self, logins):
        self.logins = sorted(logins)
        super().__init__("contributors missing from ground truth: " + ", ".join(self.logins))


def round_half_up(value: Optional[Fraction], places: int = 1) -> Optional[Decimal]:
    """Round an exact rational half away from zero; ``None`` passes through."""
    if value is None:
        return None
    scaled = Fraction(value) * 10**places
    sign = -1 if scaled < 0 else 1
    n = math.floor(abs(scaled) + Fraction(1, 2))
    return Decimal(sign * n).scaleb(-places)


@dataclass(frozen=True)
class MetricsReport:
    """Scores as percentages at full precision; ``None`` when undefined."""

    accuracy: Optional[Fraction]
    precision: Optional[Fraction]
    recall: Optional[Fraction]
    f1: Optional[Fraction]
    excluded_unknowns: int = 0
    matrix: ConfusionMatrix = field(default_factory=ConfusionMatrix)

    def rounded(self, places: int = 1) -> dict[str, Optional[Decimal]]:
        return {
            name: round_half_up(getattr(self, name), places)
            for name in ("accuracy", "precision", "recall", "f1")
        }

    def as_floats(self) -> dict[str, Optional[float]]:
        return {
            name: None if getattr(self, name) is None else float(getattr(self, name))
            for name in ("accuracy", "precision", "recall", "f1")
        }


def _ratio(num: int, den: int) -> Optional[Fraction]:
    return None if den == 0 else Fraction(100 * num, den)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total == 0:
        raise ValueError("cannot score an empty confusion matrix")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricsReport(
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        precision=precision,
        recall=recall,
        f1=f1,
        excluded_unknowns=cm.excluded_unknowns,
        matrix=cm,
    )


def confusion(predictions: Iterable[Prediction], truth: GroundTruth) -> ConfusionMatrix:
    """Prediction-level confusion matrix; unknown predictions are only counted."""
    tally: Counter = Counter()
    unknown = 0
    missing = set()
    for p in predictions:
        if p.label is Label.UNKNOWN:
            unknown += 1
            continue
        actual = truth.get(p.contributor)
        if actual is None:
            missing.add(p.contributor)
            continue
        tally[(p.label, actual)] += 1
    if missing:
        raise MissingTruthError(missing)
    return ConfusionMatrix(
        tp=tally[(Label.BOT, Label.BOT)],
        tn=tally[(Label.HUMAN, Label.HUMAN)],
        fp=tally[(Label.BOT, Label.HUMAN)],
        fn=tally[(Label.HUMAN, Label.BOT)],
        excluded_unknowns=unknown,
    )


def contributor_level(
    predictions: Iterable[Prediction], tie_break: Label = Label.HUMAN
) -> list[Prediction]:
    """One prediction per contributor: its majority bot/human label."""
    votes: dict[str, Counter] = {}
    for p in predictions:
        votes.setdefault(p.contributor, Counter())[p.label] += 1
    return [
        Prediction(login, "*", majority_label(v[Label.BOT], v[Label.HUMAN], tie_break))
        for login, v in votes.items()
    ]


@dataclass(frozen=True)
class FlipSummary:
    bot_to_human_correct: int = 0
    bot_to_human_wrong: int = 0
    human_to_bot_correct: int = 0
    human_to_bot_wrong: int = 0
    completed_correct: int = 0
    completed_wrong: int = 0

    @property
    def bot_to_human(self) -> int:
        return self.bot_to_human_correct + self.bot_to_human_wrong

    @property
    def human_to_bot(self) -> int:
        return self.human_to_bot_correct + self.human_to_bot_wrong

    @property
    def completed(self) -> int:
        return self.completed_correct + self.completed_wrong

    @property
    def total(self) -> int:
        return self.bot_to_human + self.human_to_bot + self.completed


@dataclass(frozen=True)
class Comparison:
    before: MetricsReport
    after: MetricsReport
    flips: FlipSummary
    names: tuple[str, str] = ("observed", "aggregated")


def compare_models(
    before: Iterable[Prediction], after: Iterable[Prediction], truth: GroundTruth
) -> Comparison:
    before = list(before)
    after = list(after)
    before_by = {p.key: p for p in before}
    after_by = {p.key: p for p in after}
    if before_by.keys() != after_by.keys():
        diff = sorted(before_by.keys() ^ after_by.keys())
        raise ValueError(f"prediction sets cover different pairs, e.g. {diff[:3]}")
    tally: Counter = Counter()
    for key, b in before_by.items():
        a = after_by[key]
        if a.label is b.label:
            continue
        actual = truth.get(b.contributor)
        if actual is None:
            raise MissingTruthError({b.contributor})
        correct = a.label is actual
        if b.label is Label.UNKNOWN:
            tally["completed", correct] += 1
        elif a.label is Label.HUMAN:
            tally["bot_to_human", correct] += 1
        elif a.label is Label.BOT:
            tally["human_to_bot", correct] += 1
    flips = FlipSummary(
        **{
            f"{kind}_{'correct' if ok else 'wrong'}": n
            for (kind, ok), n in tally.items()
        }
    )
    return Comparison(
        before=metrics(confusion(before, truth)),
        after=metrics(confusion(after, truth)),
        flips=flips,
    )


def _cell(value: Optional[Decimal]) -> str:
    return "n/a" if value is None else str(value)


def format_table(rows: list[tuple[str, MetricsReport]]) -> str:
    """Aligned plain-text table: TP TN FP FN Acc Prec Recall F1."""
    body = []
    for name, report in rows:
        cm = report.matrix
        r = report.rounded()
        body.append(
            [name, str(cm.tp), str(cm.tn), str(cm.fp), str(cm.fn)]
            + [_cell(r[k]) for k in ("accuracy", "precision", "recall", "f1")]
        )
    header = [""] + TABLE_COLUMNS
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]
    lines = []
    for row in [header] + body:
        first = row[0].ljust(widths[0])
        rest = [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append(" | ".join([first, "  ".join(rest)]).rstrip())
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def format_comparison(comp: Comparison) -> str:
    f = comp.flips
    text = format_table([(comp.names[0], comp.before), (comp.names[1], comp.after)])
    text += (
        f"\nreplaced {f.bot_to_human + f.human_to_bot} predictions: "
        f"{f.bot_to_human} bot->human ({f.bot_to_human_correct} correct), "
        f"{f.human_to_bot} human->bot ({f.human_to_bot_correct} correct)\n"
    )
    if f.completed:
        text += f"completed {f.completed} unknown predictions ({f.completed_correct} correct)\n"
    text += f"excluded unknown predictions: {comp.before.excluded_unknowns} before, {comp.after.excluded_unknowns} after\n"
    return text


def report_json(report: MetricsReport) -> dict:
    cm = report.matrix
    return {
        "tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn,
        "excluded_unknowns": report.excluded_unknowns,
        **{k: None if v is None else float(v) for k, v in report.rounded().items()},
    }


def comparison_json(comp: Comparison) -> str:
    data = {
        comp.names[0]: report_json(comp.before),
        comp.names[1]: report_json(comp.after),
        "flips": {
            "bot_to_human_correct": comp.flips.bot_to_human_correct,
            "bot_to_human_wrong": comp.flips.bot_to_human_wrong,
            "human_to_bot_correct": comp.flips.human_to_bot_correct,
            "human_to_bot_wrong": comp.flips.human_to_bot_wrong,
            "completed_correct": comp.flips.completed_correct,
            "completed_wrong": comp.flips.completed_wrong,
        },
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def export_scatter(entries: Iterable[ContributorPredictions], truth: GroundTruth) -> str:
    """Per-contributor vote counts with the actual type, as CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCATTER_HEADER)
    for e in entries:
        actual = truth.get(e.contributor)
        n_bot, n_human, n_unknown = e.counts
        writer.writerow([e.contributor, n_bot, n_human, n_unknown, "" if actual is None else actual.value])
    return buf.getvalue()


def parse_truth_csv(text: str) -> GroundTruth:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"contributor", "type"} <= set(reader.fieldnames):
        raise ValueError("ground truth CSV must have header contributor,type")
    pairs = []
    for lineno, row in enumerate(reader, start=2):
        label = (row["type"] or "").strip().lower()
        if label not in ("bot", "human"):
            raise ValueError(f"line {lineno}: type must be bot or human, got {row['type']!r}")
        pairs.append((row["contributor"], label))
    return GroundTruth(pairs)
