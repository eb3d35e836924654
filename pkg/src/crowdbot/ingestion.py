"""Acquire comment corpora from GitHub or from line-delimited JSON files.

Both routes apply the same sampling: comments older than ``since`` are
dropped and each contributor keeps at most ``max_comments`` comments per
repository, newest first, issue and pull request comments counted together.
"""

from __future__ import annotations

import json
import logging
import os
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

import requests

from crowdbot.domain import (
    REPO_RE,
    CommentRecord,
    ContributorRepoActivity,
    CorpusError,
    format_timestamp,
    validate_corpus,
)

log = logging.getLogger(__name__)

API_URL = "https://api.github.com"
TOKEN_ENV = "GITHUB_TOKEN"
DEFAULT_SINCE = datetime(2016, 12, 1, tzinfo=timezone.utc)


class IngestionError(Exception):
    pass


class AuthenticationError(IngestionError):
    pass


class RepositoryNotFound(IngestionError):
    pass


@dataclass(frozen=True)
class RepositoryStats:
    repository: str
    n_issues: int = 0
    n_pull_requests: int = 0

    def __post_init__(self):
        if self.n_issues < 0 or self.n_pull_requests < 0:
            raise ValueError("issue and pull request counts must be non-negative")


def qualify_repository(stats: RepositoryStats, min_total: int = 100) -> bool:
    """Keep repositories with at least ``min_total`` issues plus pull requests."""
    return stats.n_issues + stats.n_pull_requests >= min_total


@dataclass(frozen=True)
class FetchPlan:
    repositories: tuple[str, ...]
    since: datetime = DEFAULT_SINCE
    max_comments_per_contributor: int = 100
    page_size: int = 100
    token_env: str = TOKEN_ENV
    min_total: int = 0
    workers: int = 4

    def __post_init__(self):
        object.__setattr__(self, "repositories", tuple(self.repositories))
        if not 1 <= self.page_size <= 100:
            raise ValueError("page_size must be in [1, 100]")
        if self.max_comments_per_contributor < 1:
            raise ValueError("max_comments_per_contributor must be >= 1")
        if self.since > datetime.now(timezone.utc):
            raise ValueError("since must be in the past")
        for repo in self.repositories:
            if not REPO_RE.match(repo):
                raise ValueError(f"malformed repository identifier {repo!r}")


@dataclass
class RepoFetchStatus:
    repository: str
    pages: int = 0
    comments: int = 0
    rate_limit_waits: int = 0
    skipped: Optional[str] = None
    failure: Optional[str] = None


@dataclass
class FetchReport:
    repositories: list[RepoFetchStatus] = field(default_factory=list)

    @property
    def failures(self) -> list[RepoFetchStatus]:
        return [r for r in self.repositories if r.failure]

    def summary(self) -> str:
        lines = []
        for r in self.repositories:
            if r.failure:
                state = f"FAILED: {r.failure}"
            elif r.skipped:
                state = f"skipped: {r.skipped}"
            else:
                state = "ok"
            lines.append(
                f"{r.repository}: {r.comments} comments, {r.pages} pages, "
                f"{r.rate_limit_waits} rate-limit waits, {state}"
            )
        lines.append(
            f"{len(self.repositories)} repositories, {len(self.failures)} failures"
        )
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "repositories": [vars(r) for r in self.repositories],
            "failures": [
                {"repository": r.repository, "reason": r.failure} for r in self.failures
            ],
        }


def sort_corpus(records: Iterable[CommentRecord]) -> list[CommentRecord]:
    """Canonical ordering: repository, contributor, newest first, comment id."""
    return sorted(
        records,
        key=lambda c: (
            c.repository.lower(),
            c.contributor,
            -c.created_at.timestamp(),
            c.comment_id,
        ),
    )


def sample_corpus(
    records: Iterable[CommentRecord],
    since: Optional[datetime] = None,
    max_comments: Optional[int] = None,
) -> list[CommentRecord]:
    """Drop comments before ``since`` and cap each contributor per repository."""
    kept = []
    counts: dict[tuple[str, str], int] = defaultdict(int)
    for rec in sort_corpus(records):
        if since is not None and rec.created_at < since:
            continue
        key = (rec.repository.lower(), rec.contributor)
        if max_comments is not None and counts[key] >= max_comments:
            continue
        counts[key] += 1
        kept.append(rec)
    return kept


def activity_by_contributor(corpus: Iterable[CommentRecord]) -> list[ContributorRepoActivity]:
    groups: dict[tuple[str, str], list[CommentRecord]] = defaultdict(list)
    for rec in sort_corpus(corpus):
        groups[(rec.repository, rec.contributor)].append(rec)
    return [
        ContributorRepoActivity(contributor=c, repository=r, comments=tuple(comments))
        for (r, c), comments in groups.items()
    ]


def load_corpus(
    path,
    since: Optional[datetime] = None,
    max_comments: Optional[int] = 100,
) -> tuple[list[CommentRecord], list[CorpusError]]:
    """Read a line-delimited JSON corpus.

    Malformed lines are reported with their line number and skipped. An
    unreadable file raises ``OSError``.
    """
    raw = []
    line_of: dict[int, int] = {}
    errors: list[CorpusError] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(CorpusError(line.rstrip("\n"), f"invalid JSON: {exc.msg}", lineno))
                continue
            if not isinstance(obj, dict):
                errors.append(CorpusError(obj, "record is not an object", lineno))
                continue
            line_of[id(obj)] = lineno
            raw.append(obj)
    corpus, rejected = validate_corpus(raw)
    for err in rejected:
        err.line = line_of.get(id(err.record))
    errors.extend(rejected)
    errors.sort(key=lambda e: e.line or 0)
    return sample_corpus(corpus, since, max_comments), errors


def write_corpus(records: Iterable[CommentRecord], fh) -> None:
    for rec in records:
        fh.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=False))
        fh.write("\n")


class GitHubClient:
    """Minimal REST client for issue and pull request comments.

    Comments are listed through ``/repos/{repo}/issues/comments``, which
    covers the conversation comments of both issues and pull requests, and
    paginated by following ``Link: rel="next"`` cursors.
    """

    def __init__(
        self,
        token: Optional[str] = None,
        session=None,
        api_url: str = API_URL,
        max_attempts: int = 3,
        backoff: float = 1.0,
        sleep=time.sleep,
        clock=time.time,
    ):
        self.session = session or requests.Session()
        self.api_url = api_url.rstrip("/")
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.sleep = sleep
        self.clock = clock
        self.headers = {"Accept": "application/vnd.github+json"}
        if token:
            self.headers["Authorization"] = f"Bearer {token}"

    def _get(self, url, params=None, status: Optional[RepoFetchStatus] = None):
        attempt = 0
        while True:
            try:
                resp = self.session.get(url, params=params, headers=self.headers, timeout=30)
            except requests.RequestException as exc:
                attempt += 1
                if attempt >= self.max_attempts:
                    raise IngestionError(f"network error: {exc}") from exc
                self.sleep(self.backoff * 2 ** (attempt - 1))
                continue
            if resp.status_code == 401:
                raise AuthenticationError("authentication failed (401)")
            if resp.status_code == 404:
                raise RepositoryNotFound("repository not found (404)")
            if resp.status_code in (403, 429) and (
                resp.headers.get("X-RateLimit-Remaining") == "0"
                or "Retry-After" in resp.headers
            ):
                self.sleep(self._rate_limit_delay(resp))
                if status is not None:
                    status.rate_limit_waits += 1
                continue
            if resp.status_code == 403:
                raise AuthenticationError("access forbidden (403)")
            if resp.status_code >= 500:
                attempt += 1
                if attempt >= self.max_attempts:
                    raise IngestionError(f"server error {resp.status_code}")
                self.sleep(self.backoff * 2 ** (attempt - 1))
                continue
            if resp.status_code >= 400:
                raise IngestionError(f"HTTP {resp.status_code}")
            return resp

    def _rate_limit_delay(self, resp) -> float:
        if "Retry-After" in resp.headers:
            return max(float(resp.headers["Retry-After"]), 0.0)
        reset = resp.headers.get("X-RateLimit-Reset")
        if reset is None:
            return 60.0
        return max(float(reset) - self.clock(), 0.0) + 1.0

    def repository_stats(self, repository: str) -> RepositoryStats:
        counts = {}
        for kind in ("issue", "pr"):
            resp = self._get(
                f"{self.api_url}/search/issues",
                params={"q": f"repo:{repository} is:{kind}", "per_page": 1},
            )
            counts[kind] = int(resp.json().get("total_count", 0))
        return RepositoryStats(repository, counts["issue"], counts["pr"])

    def iter_comments(
        self, repository: str, since: datetime, page_size: int,
        status: Optional[RepoFetchStatus] = None,
    ):
        url = f"{self.api_url}/repos/{repository}/issues/comments"
        params = {
            "since": format_timestamp(since),
            "per_page": page_size,
            "sort": "created",
            "direction": "desc",
        }
        while url:
            resp = self._get(url, params=params, status=status)
            if status is not None:
                status.pages += 1
            yield from resp.json()
            url = resp.links.get("next", {}).get("url")
            params = None  # the next link carries the cursor and query


def _comment_to_record(repository: str, item: dict) -> dict:
    html_url = item.get("html_url", "")
    source = "pull_request" if "/pull/" in html_url else "issue"
    return {
        "repo": repository,
        "contributor": (item.get("user") or {}).get("login", ""),
        "created_at": item.get("created_at"),
        "body": item.get("body") or "",
        "source": source,
        "id": str(item.get("id")),
    }


def _fetch_repository(client: GitHubClient, plan: FetchPlan, repository: str):
    status = RepoFetchStatus(repository)
    raw = []
    try:
        if plan.min_total > 0:
            stats = client.repository_stats(repository)
            if not qualify_repository(stats, plan.min_total):
                status.skipped = (
                    f"{stats.n_issues + stats.n_pull_requests} issues+PRs < {plan.min_total}"
                )
                return [], status
        for item in client.iter_comments(repository, plan.since, plan.page_size, status):
            raw.append(_comment_to_record(repository, item))
    except IngestionError as exc:
        status.failure = str(exc)
        log.warning("%s: %s", repository, exc)
    records, errors = validate_corpus(raw)
    for err in errors:
        log.warning("%s: dropped comment: %s", repository, err.reason)
    records = sample_corpus(records, plan.since, plan.max_comments_per_contributor)
    status.comments = len(records)
    return records, status


def fetch_comments(plan: FetchPlan, client: Optional[GitHubClient] = None):
    """Fetch, filter and cap comments for every repository in ``plan``.

    Returns ``(corpus, report)``. Repositories that fail are listed in the
    report; comments already fetched for them are kept.
    """
    if client is None:
        token = os.environ.get(plan.token_env)
        if not token:
            raise AuthenticationError(f"environment variable {plan.token_env} is not set")
        client = GitHubClient(token=token)
    with ThreadPoolExecutor(max_workers=max(1, plan.workers)) as pool:
        results = list(pool.map(lambda r: _fetch_repository(client, plan, r), plan.repositories))
    report = FetchReport([status for _, status in results])
    corpus = sort_corpus(rec for records, _ in results for rec in records)
    return corpus, report
