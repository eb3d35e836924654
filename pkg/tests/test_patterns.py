import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdbot import patterns
from crowdbot._cluster_py import single_linkage as py_linkage
from crowdbot.domain import ContributorRepoActivity
from crowdbot.patterns import (
    cluster_patterns,
    comment_distance,
    compute_features,
    gini,
    normalize_comment,
)

from conftest import distinct_bodies, make_comments

try:
    from crowdbot._cluster import single_linkage as cy_linkage
except ImportError:  # extension not built
    cy_linkage = None

KERNELS = [pytest.param(py_linkage, id="python")]
if cy_linkage is not None:
    KERNELS.append(pytest.param(cy_linkage, id="cython"))


def brute_gini(xs):
    n = len(xs)
    mean = sum(xs) / n
    return sum(abs(a - b) for a in xs for b in xs) / (2 * n * n * mean)


def closure_partition(comments, threshold):
    """Transitive closure of the pairwise <= threshold relation, by fixpoint."""
    n = len(comments)
    rel = [[comment_distance(comments[i], comments[j]) <= threshold for j in range(n)] for i in range(n)]
    for k, i, j in itertools.product(range(n), repeat=3):
        if rel[i][k] and rel[k][j]:
            rel[i][j] = True
    return {frozenset(j for j in range(n) if rel[i][j]) for i in range(n)}


def as_partition(labels):
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, set()).add(i)
    return {frozenset(g) for g in groups.values()}


@pytest.mark.parametrize(
    "body, expected",
    [
        ("Bors r+  ", ["bors", "r+"]),
        ("", []),
        ("See https://example.com build 42", ["see", "<url>", "build", "<num>"]),
        ("Bump to 1.2.3\n```\nlet x = 1;\n```\ndone", ["bump", "to", "<num>", "<code>", "done"]),
        ("Fixes #123", ["fixes", "#<num>"]),
    ],
)
def test_normalize_comment(body, expected):
    assert normalize_comment(body) == expected


def test_template_variants_normalize_identically():
    a = normalize_comment("Bumps serde from 1.0.1 to 1.0.2. See https://x.io/a")
    b = normalize_comment("Bumps serde from 1.0.7 to 1.0.8. See https://x.io/b")
    assert a == b


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (["x", "y"], ["x", "y"], 0.0),
        (["a", "b"], ["b", "c"], 1 - 1 / 3),
        (["a"], ["b"], 1.0),
        ([], [], 0.0),
        ([], ["a"], 1.0),
    ],
)
def test_comment_distance(a, b, expected):
    assert comment_distance(a, b) == pytest.approx(expected, abs=1e-12)


def test_gini_fixtures():
    assert gini([1, 1, 1, 1]) == 0
    assert gini([1, 3]) == pytest.approx(0.25, abs=1e-9)
    assert gini([1, 1, 8]) == pytest.approx(0.4667, abs=1e-4)
    assert gini([1, 1, 8]) == pytest.approx(28 / (2 * 9 * 10 / 3), abs=1e-9)


def test_gini_empty_is_error():
    with pytest.raises(ValueError):
        gini([])


@given(st.lists(st.integers(1, 200), min_size=1, max_size=30))
def test_gini_matches_pairwise_definition(xs):
    assert gini(xs) == pytest.approx(brute_gini(xs), abs=1e-9)
    assert 0 <= gini(xs) < 1


@given(st.lists(st.integers(1, 100), min_size=1, max_size=20), st.integers(1, 50))
def test_gini_scale_invariant(xs, k):
    assert gini([k * x for x in xs]) == pytest.approx(gini(xs), abs=1e-9)


def test_cluster_examples():
    same = [["a", "b"]] * 5
    assert cluster_patterns(same).pattern_sizes == (5,)
    groups = [["a"], ["a"], ["z"], ["z"], ["a"]]
    result = cluster_patterns(groups, 0.5)
    assert result.pattern_sizes == (3, 2)
    assert result.pattern_index == (0, 0, 1, 1, 0)
    assert cluster_patterns([["x"]]).pattern_sizes == (1,)
    assert cluster_patterns([]).pattern_sizes == ()


def test_cluster_rejects_bad_threshold():
    with pytest.raises(ValueError):
        cluster_patterns([["a"]], 1.5)


def test_single_linkage_chains():
    # a~b and b~c at threshold 0.5, but a and c are disjoint
    comments = [["a", "b"], ["b", "c"], ["c", "d"]]
    assert comment_distance(comments[0], comments[2]) == 1.0
    assert cluster_patterns(comments, 0.7).pattern_sizes == (3,)
    assert cluster_patterns(comments, 0.5).pattern_sizes == (1, 1, 1)


token_lists = st.lists(
    st.lists(st.sampled_from("abcdef"), min_size=0, max_size=4), min_size=1, max_size=8
)


@pytest.mark.parametrize("kernel", KERNELS)
@settings(max_examples=300, deadline=None)
@given(comments=token_lists, threshold=st.sampled_from([0.0, 0.25, 0.5, 2 / 3, 0.75, 1.0]))
def test_clustering_equals_transitive_closure(kernel, comments, threshold):
    labels = cluster_patterns(comments, threshold, kernel=kernel).pattern_index
    assert as_partition(labels) == closure_partition(comments, threshold)


@settings(max_examples=200, deadline=None)
@given(comments=token_lists, threshold=st.floats(0, 1), seed=st.integers(0, 10**6))
def test_pattern_sizes_permutation_stable(comments, threshold, seed):
    shuffled = list(comments)
    random.Random(seed).shuffle(shuffled)
    a = sorted(cluster_patterns(comments, threshold).pattern_sizes)
    b = sorted(cluster_patterns(shuffled, threshold).pattern_sizes)
    assert a == b


@given(comments=token_lists)
def test_threshold_extremes(comments):
    distinct_sets = {frozenset(c) for c in comments}
    assert cluster_patterns(comments, 0.0).n_patterns == len(distinct_sets)
    assert cluster_patterns(comments, 1.0).n_patterns == 1


@given(comments=token_lists, threshold=st.floats(0, 1))
def test_assignment_invariants(comments, threshold):
    result = cluster_patterns(comments, threshold)
    assert sum(result.pattern_sizes) == len(comments)
    assert 1 <= result.n_patterns <= len(comments)
    # indices numbered by first occurrence
    firsts = [result.pattern_index.index(k) for k in range(result.n_patterns)]
    assert firsts == sorted(firsts)


@pytest.mark.skipif(cy_linkage is None, reason="compiled kernel not built")
def test_kernels_agree_on_large_random_input():
    rng = random.Random(3)
    vocab = list(range(40))
    sets = [rng.sample(vocab, rng.randint(0, 6)) for _ in range(150)]
    for threshold in (0.3, 0.5, 0.8):
        assert cy_linkage(sets, threshold) == py_linkage(sets, threshold)


def test_active_kernel_is_reported():
    assert patterns.KERNEL in ("cython", "python")


def activity(bodies):
    comments = tuple(make_comments("o/r", "u", bodies))
    return ContributorRepoActivity("u", "o/r", comments)


def test_compute_features_identical_comments():
    fv = compute_features(activity(["LGTM"] * 6))
    assert (fv.n_comments, fv.n_patterns, fv.gini) == (6, 1, 0)
    assert fv.pattern_ratio == pytest.approx(1 / 6, abs=1e-4)


def test_compute_features_24_comments_10_patterns():
    # 15 copies of one template plus 9 one-off comments
    bodies = ["Bumps rand from 0.7.1 to 0.7.2"] * 15 + distinct_bodies(9)
    fv = compute_features(activity(bodies))
    assert (fv.n_comments, fv.n_patterns) == (24, 10)
    assert fv.pattern_ratio == pytest.approx(0.4167, abs=1e-4)
    assert fv.gini == pytest.approx(brute_gini([15] + [1] * 9), abs=1e-12)


def test_compute_features_empty():
    fv = compute_features(ContributorRepoActivity("u", "o/r", ()))
    assert fv.n_comments == 0
    assert fv.n_patterns is None and fv.gini is None and fv.pattern_ratio is None


def test_pure_python_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, CROWDBOT_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import crowdbot.patterns as p; print(p.KERNEL)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
