"""Synthetic prediction sets for checking majority-vote correction.

Random numbers come from numpy's PCG64 bit generator seeded with
``SimConfig.seed``. Draws happen contributor by contributor in this order:
truth (``random() < bot_prevalence``), repository bucket (``choice`` over
the bucket probabilities), repository count within the bucket
(``integers``, uniform), then for each repository ``random() <
unknown_rate`` for unknown and, if known, ``random() < p`` for correct.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from crowdbot.aggregation import BUCKETS, apply_wocp
from crowdbot.domain import AggregationConfig, GroundTruth, Label, Prediction
from crowdbot.evaluation import confusion, metrics

# contributors per repository-count bucket among those with enough activity
REFERENCE_BUCKET_COUNTS = (5671, 1530, 496, 385, 239, 211)
DEFAULT_DISTRIBUTION = tuple(
    (b, n / sum(REFERENCE_BUCKET_COUNTS)) for b, n in zip(BUCKETS, REFERENCE_BUCKET_COUNTS)
)

SWEEP_HEADER = ["p", "bucket", "raw_accuracy", "wocp_accuracy", "n"]


def bucket_range(bucket: str, max_repos: int) -> tuple[int, int]:
    """Inclusive repository-count range covered by a bucket label."""
    if bucket.endswith("+"):
        return int(bucket[:-1]), max_repos
    if "-" in bucket:
        lo, hi = bucket.split("-")
        return int(lo), int(hi)
    return int(bucket), int(bucket)


@dataclass(frozen=True)
class SimConfig:
    n_contributors: int = 2000
    repo_count_distribution: tuple[tuple[str, float], ...] = DEFAULT_DISTRIBUTION
    bot_prevalence: float = 0.5
    p: float = 0.9
    unknown_rate: float = 0.0
    seed: int = 0
    max_repos: int = 20
    tie_break: Label = field(default=Label.HUMAN)

    def __post_init__(self):
        object.__setattr__(
            self, "repo_count_distribution", tuple(tuple(x) for x in self.repo_count_distribution)
        )
        if self.n_contributors < 0:
            raise ValueError("n_contributors must be non-negative")
        probs = [pr for _, pr in self.repo_count_distribution]
        if not probs or any(pr < 0 for pr in probs) or not math.isclose(sum(probs), 1.0, abs_tol=1e-9):
            raise ValueError("repository-count probabilities must be non-negative and sum to 1")
        for name in ("bot_prevalence", "p"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not 0.0 <= self.unknown_rate < 1.0:
            raise ValueError("unknown_rate must be in [0, 1)")
        for bucket, _ in self.repo_count_distribution:
            lo, hi = bucket_range(bucket, self.max_repos)
            if not 1 <= lo <= hi:
                raise ValueError(f"bad bucket {bucket!r} for max_repos={self.max_repos}")


def simulate(config: SimConfig) -> tuple[list[Prediction], GroundTruth]:
    rng = np.random.Generator(np.random.PCG64(config.seed))
    buckets = [b for b, _ in config.repo_count_distribution]
    probs = np.array([pr for _, pr in config.repo_count_distribution], dtype=float)
    probs = probs / probs.sum()
    ranges = [bucket_range(b, config.max_repos) for b in buckets]
    width = len(str(max(config.n_contributors - 1, 0)))

    predictions: list[Prediction] = []
    truth = {}
    for k in range(config.n_contributors):
        login = f"sim-{k:0{width}d}"
        actual = Label.BOT if rng.random() < config.bot_prevalence else Label.HUMAN
        wrong = Label.HUMAN if actual is Label.BOT else Label.BOT
        truth[login] = actual
        lo, hi = ranges[int(rng.choice(len(buckets), p=probs))]
        n_repos = int(rng.integers(lo, hi + 1))
        for r in range(n_repos):
            if rng.random() < config.unknown_rate:
                label = Label.UNKNOWN
            else:
                label = actual if rng.random() < config.p else wrong
            predictions.append(Prediction(login, f"sim/repo-{r:02d}", label))
    return predictions, GroundTruth(truth)


def _accepts(selector: str, n_repos: int) -> bool:
    if selector == "all":
        return True
    lo, hi = bucket_range(selector, 10**9)
    return lo <= n_repos <= hi


def _accuracy(predictions: Sequence[Prediction], truth: GroundTruth) -> Optional[float]:
    cm = confusion(predictions, truth)
    if cm.total == 0:
        return None
    return float(metrics(cm).accuracy)


@dataclass(frozen=True)
class SweepRow:
    p: float
    bucket: str
    raw_accuracy: Optional[float]
    wocp_accuracy: Optional[float]
    n: int


def evaluate_simulation(config: SimConfig, bucket: str = "2+") -> SweepRow:
    """Raw vs majority-vote accuracy (percent) over contributors in ``bucket``.

    ``bucket`` is ``all``, a bucket label such as ``4-5``, or ``N+`` for
    contributors active in at least N repositories.
    """
    predictions, truth = simulate(config)
    n_repos: dict[str, int] = {}
    for p in predictions:
        n_repos[p.contributor] = n_repos.get(p.contributor, 0) + 1
    selected = {c for c, n in n_repos.items() if _accepts(bucket, n)}
    raw = [p for p in predictions if p.contributor in selected]
    revised = apply_wocp(raw, AggregationConfig(tie_break=config.tie_break))
    return SweepRow(config.p, bucket, _accuracy(raw, truth), _accuracy(revised, truth), len(selected))


def sweep(configs: Sequence[SimConfig], bucket: str = "2+") -> list[SweepRow]:
    return [evaluate_simulation(c, bucket) for c in configs]


def format_sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for r in rows:
        writer.writerow([
            f"{r.p:g}",
            r.bucket,
            "" if r.raw_accuracy is None else f"{r.raw_accuracy:.4f}",
            "" if r.wocp_accuracy is None else f"{r.wocp_accuracy:.4f}",
            r.n,
        ])
    return buf.getvalue()
