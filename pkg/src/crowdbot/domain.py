"""Shared value types used across the pipeline.

Every type here is immutable. Contributor logins are compared
case-insensitively (GitHub treats them that way), so all constructors
fold logins to lower case.
"""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping, Optional


REPO_RE = re.compile(r"^[A-Za-z0-9_.-]+/[A-Za-z0-9_.-]+$")


class Label(str, enum.Enum):
    BOT = "bot"
    HUMAN = "human"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "Label":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"invalid label {text!r}") from None


class Source(str, enum.Enum):
    ISSUE = "issue"
    PULL_REQUEST = "pull_request"


class Origin(str, enum.Enum):
    """Where a prediction's label came from."""

    OBSERVED = "observed"
    WOC_FLIPPED = "woc_flipped"
    WOC_COMPLETED = "woc_completed"

    @property
    def wire(self) -> str:
        return self.value.replace("_", "-")

    @classmethod
    def parse(cls, text: str) -> "Origin":
        try:
            return cls(text.strip().lower().replace("-", "_"))
        except ValueError:
            raise ValueError(f"invalid origin {text!r}") from None


def normalize_login(login: str) -> str:
    login = login.strip()
    if not login:
        raise ValueError("empty contributor login")
    return login.lower()


def parse_timestamp(value) -> datetime:
    """Parse an ISO-8601 instant and return it in UTC.

    Naive values are taken to be UTC already.
    """
    if isinstance(value, datetime):
        ts = value
    else:
        text = str(value).strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class CommentRecord:
    repository: str
    contributor: str
    created_at: datetime
    body: str
    source: Source
    comment_id: str

    @classmethod
    def create(cls, repository, contributor, created_at, body, source, comment_id):
        """Build a record from loosely typed values, validating each field."""
        repository = str(repository).strip()
        if not REPO_RE.match(repository):
            raise ValueError(f"malformed repository identifier {repository!r}")
        try:
            ts = parse_timestamp(created_at)
        except (TypeError, ValueError):
            raise ValueError(f"unparseable timestamp {created_at!r}") from None
        try:
            src = Source(source)
        except ValueError:
            raise ValueError(f"invalid source {source!r}") from None
        if body is None:
            body = ""
        return cls(
            repository=repository,
            contributor=normalize_login(str(contributor)),
            created_at=ts,
            body=str(body),
            source=src,
            comment_id=str(comment_id),
        )

    @property
    def key(self) -> tuple[str, str]:
        return (self.repository.lower(), self.comment_id)

    def to_json(self) -> dict:
        return {
            "repo": self.repository,
            "contributor": self.contributor,
            "created_at": format_timestamp(self.created_at),
            "body": self.body,
            "source": self.source.value,
            "id": self.comment_id,
        }


@dataclass(frozen=True)
class ContributorRepoActivity:
    contributor: str
    repository: str
    comments: tuple[CommentRecord, ...] = ()

    def __post_init__(self):
        for c in self.comments:
            if c.contributor != self.contributor or c.repository != self.repository:
                raise ValueError(
                    f"comment {c.comment_id} does not belong to "
                    f"{self.contributor}@{self.repository}"
                )


@dataclass(frozen=True)
class FeatureVector:
    """Per (contributor, repository) features.

    ``n_patterns``, ``gini`` and ``pattern_ratio`` are ``None`` when there
    are no comments.
    """

    n_comments: int
    n_patterns: Optional[int] = None
    gini: Optional[float] = None
    pattern_ratio: Optional[float] = None

    def __post_init__(self):
        if self.n_comments < 0:
            raise ValueError("n_comments must be non-negative")
        if self.n_comments == 0:
            return
        if self.n_patterns is None or not 1 <= self.n_patterns <= self.n_comments:
            raise ValueError(
                f"n_patterns={self.n_patterns} outside [1, {self.n_comments}]"
            )
        if self.gini is None or not 0.0 <= self.gini < 1.0:
            raise ValueError(f"gini={self.gini} outside [0, 1)")
        if self.pattern_ratio is None:
            object.__setattr__(self, "pattern_ratio", self.n_patterns / self.n_comments)

    @classmethod
    def of(cls, n_comments: int, n_patterns: int, gini: float) -> "FeatureVector":
        if n_comments == 0:
            return cls(0)
        return cls(n_comments, n_patterns, gini, n_patterns / n_comments)


@dataclass(frozen=True)
class Prediction:
    contributor: str
    repository: str
    label: Label
    origin: Origin = Origin.OBSERVED
    features: Optional[FeatureVector] = None

    def __post_init__(self):
        object.__setattr__(self, "contributor", normalize_login(self.contributor))
        object.__setattr__(self, "label", Label(self.label))
        object.__setattr__(self, "origin", Origin(self.origin))

    @property
    def key(self) -> tuple[str, str]:
        return (self.contributor, self.repository.lower())


@dataclass(frozen=True)
class ContributorPredictions:
    contributor: str
    per_repo: Mapping[str, Label] = field(default_factory=dict)

    @property
    def counts(self) -> tuple[int, int, int]:
        tally = Counter(self.per_repo.values())
        return (tally[Label.BOT], tally[Label.HUMAN], tally[Label.UNKNOWN])

    @property
    def n_bot(self) -> int:
        return self.counts[0]

    @property
    def n_human(self) -> int:
        return self.counts[1]

    @property
    def n_unknown(self) -> int:
        return self.counts[2]

    @property
    def n_repositories(self) -> int:
        return len(self.per_repo)


class GroundTruth(dict):
    """Mapping of lower-cased login to its actual type (bot or human)."""

    def __init__(self, items: Mapping[str, Label | str] | Iterable = ()):
        super().__init__()
        pairs = items.items() if isinstance(items, Mapping) else items
        for login, label in pairs:
            login = normalize_login(login)
            label = Label.parse(label) if isinstance(label, str) else Label(label)
            if label is Label.UNKNOWN:
                raise ValueError(f"ground truth for {login!r} cannot be unknown")
            if login in self and self[login] is not label:
                raise ValueError(f"conflicting ground truth for {login!r}")
            self[login] = label


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0
    excluded_unknowns: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn, self.excluded_unknowns) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class AggregationConfig:
    tie_break: Label = Label.HUMAN
    complete_unknowns: bool = False
    bot_threshold: int = 3
    min_comments: int = 10
    max_comments: int = 100
    since: Optional[datetime] = None

    def __post_init__(self):
        object.__setattr__(self, "tie_break", Label(self.tie_break))
        if self.tie_break is Label.UNKNOWN:
            raise ValueError("tie_break must be bot or human")
        if self.bot_threshold < 1:
            raise ValueError("bot_threshold must be >= 1")
        if self.min_comments < 1:
            raise ValueError("min_comments must be >= 1")
        if self.max_comments < self.min_comments:
            raise ValueError("max_comments must be >= min_comments")


@dataclass
class CorpusError:
    record: object
    reason: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{where}{self.reason}"


def validate_corpus(records: Iterable) -> tuple[list[CommentRecord], list[CorpusError]]:
    """Validate records, dropping duplicates and malformed entries.

    Accepts ``CommentRecord`` instances or mappings in the offline line
    format. Returns the accepted records in input order plus one error per
    rejected record; a bad record never aborts the batch.
    """
    corpus: list[CommentRecord] = []
    errors: list[CorpusError] = []
    seen: set[tuple[str, str]] = set()
    for rec in records:
        try:
            if isinstance(rec, CommentRecord):
                rec_ok = CommentRecord.create(
                    rec.repository, rec.contributor, rec.created_at,
                    rec.body, rec.source, rec.comment_id,
                )
            else:
                rec_ok = CommentRecord.create(
                    rec["repo"], rec["contributor"], rec["created_at"],
                    rec.get("body", ""), rec["source"], rec["id"],
                )
        except KeyError as exc:
            errors.append(CorpusError(rec, f"missing field {exc.args[0]!r}"))
            continue
        except ValueError as exc:
            errors.append(CorpusError(rec, str(exc)))
            continue
        if rec_ok.key in seen:
            errors.append(
                CorpusError(rec, f"duplicate comment {rec_ok.comment_id} in {rec_ok.repository}")
            )
            continue
        seen.add(rec_ok.key)
        corpus.append(rec_ok)
    return corpus, errors
