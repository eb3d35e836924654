from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from crowdbot.domain import CommentRecord

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


def make_comments(repo, who, bodies, start=datetime(2020, 1, 1, tzinfo=timezone.utc), id_prefix=""):
    return [
        CommentRecord.create(
            repo, who, start + timedelta(minutes=i), body, "issue", f"{id_prefix}{who}-{i}"
        )
        for i, body in enumerate(bodies)
    ]


def _word(k):
    letters = ""
    k += 1
    while k:
        k, r = divmod(k - 1, 26)
        letters = chr(97 + r) + letters
    return letters


def distinct_bodies(n, offset=0):
    # pairwise disjoint token sets, digit-free so normalization keeps them apart
    return [" ".join(_word(3 * (offset + i) + j) + "x" for j in range(3)) for i in range(n)]


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        _acceptance[name] = "PASS" if report.outcome == "passed" else report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance.items()):
        terminalreporter.write_line(f"{outcome:<6} {name}")
