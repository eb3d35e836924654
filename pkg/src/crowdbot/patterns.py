"""Comment normalization, pattern clustering and feature extraction.

Two comments belong to the same pattern when they are connected by a
chain of comments whose pairwise token-set Jaccard distance is at most
``threshold`` (single linkage). The clustering kernel is compiled when
the ``crowdbot._cluster`` extension is available; set
``CROWDBOT_PURE_PYTHON=1`` to force the pure-Python kernel.
"""

from __future__ import annotations

import os
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from crowdbot._cluster_py import single_linkage as _single_linkage_py
from crowdbot.domain import ContributorRepoActivity, FeatureVector

if os.environ.get("CROWDBOT_PURE_PYTHON"):
    _single_linkage = _single_linkage_py
    KERNEL = "python"
else:
    try:
        from crowdbot._cluster import single_linkage as _single_linkage
        KERNEL = "cython"
    except ImportError:
        _single_linkage = _single_linkage_py
        KERNEL = "python"

DEFAULT_THRESHOLD = 0.5

_CODE_RE = re.compile(r"```.*?(?:```|\Z)", re.DOTALL)
_URL_RE = re.compile(r"(?:https?|ftp)://\S+|www\.\S+", re.IGNORECASE)
_NUM_RE = re.compile(r"\d+(?:[.,]\d+)*")
_PLACEHOLDERS = {"<url>", "<code>", "<num>"}


def normalize_comment(body: str) -> list[str]:
    """Lower-case and tokenize a comment body.

    Fenced code blocks become ``<code>``, URLs ``<url>`` and digit runs
    ``<num>``.

    >>> normalize_comment("See https://example.com build 42")
    ['see', '<url>', 'build', '<num>']
    """
    if not body:
        return []
    text = _CODE_RE.sub(" <code> ", body)
    text = _URL_RE.sub(" <url> ", text)
    tokens = []
    for tok in text.lower().split():
        if tok not in _PLACEHOLDERS:
            tok = _NUM_RE.sub("<num>", tok)
        tokens.append(tok)
    return tokens


def comment_distance(a: Sequence[str], b: Sequence[str]) -> float:
    """Jaccard distance between the token sets of two comments."""
    sa, sb = set(a), set(b)
    union = len(sa | sb)
    if union == 0:
        return 0.0
    return 1.0 - len(sa & sb) / union


@dataclass(frozen=True)
class PatternAssignment:
    pattern_index: tuple[int, ...]
    pattern_sizes: tuple[int, ...]

    @property
    def n_patterns(self) -> int:
        return len(self.pattern_sizes)


def _encode(comments: Sequence[Sequence[str]]) -> list[list[int]]:
    vocab: dict[str, int] = {}
    encoded = []
    for tokens in comments:
        ids = {vocab.setdefault(t, len(vocab)) for t in tokens}
        encoded.append(sorted(ids))
    return encoded


def cluster_patterns(
    comments: Sequence[Sequence[str]],
    threshold: float = DEFAULT_THRESHOLD,
    *,
    kernel=None,
) -> PatternAssignment:
    """Group normalized comments into patterns by single linkage.

    Pattern indices are numbered in order of each pattern's first comment.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    if not comments:
        return PatternAssignment((), ())
    linkage = kernel or _single_linkage
    labels = linkage(_encode(comments), float(threshold))
    sizes = Counter(labels)
    return PatternAssignment(
        tuple(labels), tuple(sizes[k] for k in range(len(sizes)))
    )


def gini(sizes: Sequence[float]) -> float:
    """Mean-absolute-difference Gini coefficient, without small-sample correction.

    Equals ``sum_i sum_j |x_i - x_j| / (2 n^2 mean)``, computed in
    O(n log n) from the sorted values.
    """
    if len(sizes) == 0:
        raise ValueError("gini is undefined for an empty list")
    xs = sorted(sizes)
    if xs[0] < 0:
        raise ValueError("gini requires non-negative sizes")
    n = len(xs)
    total = sum(xs)
    if total <= 0:
        raise ValueError("gini requires a positive total")
    # sum_{i<j} (x_j - x_i) = sum_k (2k - n + 1) x_k for ascending x
    weighted = sum((2 * k - n + 1) * x for k, x in enumerate(xs))
    return weighted / (n * total)


def compute_features(
    activity: ContributorRepoActivity, threshold: float = DEFAULT_THRESHOLD
) -> FeatureVector:
    n = len(activity.comments)
    if n == 0:
        return FeatureVector(0)
    assignment = cluster_patterns(
        [normalize_comment(c.body) for c in activity.comments], threshold
    )
    return FeatureVector.of(n, assignment.n_patterns, gini(assignment.pattern_sizes))
