from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crowdbot.aggregation import aggregate, apply_wocp, collect
from crowdbot.domain import AggregationConfig, ConfusionMatrix, GroundTruth, Label, Prediction
from crowdbot.evaluation import (
    MissingTruthError,
    compare_models,
    comparison_json,
    confusion,
    contributor_level,
    export_scatter,
    format_comparison,
    format_table,
    metrics,
    parse_truth_csv,
    round_half_up,
)

B, H, U = Label.BOT, Label.HUMAN, Label.UNKNOWN


def preds(login, *labels):
    return [Prediction(login, f"o/r{i}", lab) for i, lab in enumerate(labels)]


def rounded(cm):
    r = metrics(ConfusionMatrix(*cm)).rounded()
    return tuple(str(r[k]) for k in ("accuracy", "precision", "recall", "f1"))


def test_table_rows_reproduce():
    assert rounded((928, 288, 79, 31)) == ("91.7", "92.2", "96.8", "94.4")
    assert rounded((959, 348, 19, 0)) == ("98.6", "98.1", "100.0", "99.0")
    assert rounded((1, 1, 0, 0)) == ("100.0",) * 4


def test_published_totals_consistent():
    assert 928 + 288 + 79 + 31 == 959 + 348 + 19 + 0 == 1326


def test_undefined_ratios_are_none():
    report = metrics(ConfusionMatrix(0, 5, 0, 0))
    assert report.precision is None and report.recall is None and report.f1 is None
    assert report.accuracy == 100
    with pytest.raises(ValueError):
        metrics(ConfusionMatrix())


def test_round_half_up_is_exact():
    assert round_half_up(Fraction(1, 4), 1) == Decimal("0.3")
    assert round_half_up(Fraction(5, 100), 1) == Decimal("0.1")
    assert round_half_up(Fraction(-1, 4), 1) == Decimal("-0.3")
    assert round_half_up(None) is None


def test_confusion_basic():
    truth = GroundTruth({"a": "bot", "h": "human"})
    assert confusion(preds("a", B) + preds("h", H), truth) == ConfusionMatrix(1, 1, 0, 0)


def test_confusion_excludes_unknown():
    cm = confusion(preds("a", U), GroundTruth({"a": "bot"}))
    assert (cm.tp, cm.tn, cm.fp, cm.fn, cm.excluded_unknowns) == (0, 0, 0, 0, 1)


def test_confusion_missing_truth_names_logins():
    with pytest.raises(MissingTruthError) as info:
        confusion(preds("ghost", B) + preds("zed", H), GroundTruth({"a": "bot"}))
    assert info.value.logins == ["ghost", "zed"]


label_lists = st.lists(st.tuples(st.sampled_from(["a", "b", "c", "d"]), st.sampled_from([B, H, U])), max_size=30)
TRUTH = GroundTruth({"a": "bot", "b": "human", "c": "bot", "d": "human"})


@given(label_lists)
def test_perfect_predictions_score_100(items):
    ps = [Prediction(login, f"o/r{i}", TRUTH[login]) for i, (login, _) in enumerate(items)]
    if ps:
        assert set(metrics(confusion(ps, TRUTH)).rounded().values()) <= {Decimal("100.0"), None}


@given(label_lists)
def test_swapping_labels_swaps_cells(items):
    ps = [Prediction(login, f"o/r{i}", lab) for i, (login, lab) in enumerate(items)]
    swap = {B: H, H: B, U: U}
    swapped = [Prediction(p.contributor, p.repository, swap[p.label]) for p in ps]
    a, b = confusion(ps, TRUTH), confusion(swapped, TRUTH)
    assert (a.tp, a.fn, a.tn, a.fp) == (b.fn, b.tp, b.fp, b.tn)


@given(label_lists, st.integers(1, 4))
def test_flip_counts_equal_changed_positions(items, threshold):
    before = [Prediction(login, f"o/r{i}", lab) for i, (login, lab) in enumerate(items)]
    after = aggregate(before, AggregationConfig(complete_unknowns=True, bot_threshold=threshold))
    if not confusion(before, TRUTH).total:
        return
    comp = compare_models(before, after, TRUTH)
    changed = sum(b.label is not a.label for b, a in zip(before, after))
    assert comp.flips.total == changed


def test_compare_identity():
    ps = preds("a", B, B, H) + preds("h", H, H)
    truth = GroundTruth({"a": "bot", "h": "human"})
    comp = compare_models(ps, ps, truth)
    assert comp.flips.total == 0
    assert comp.before == comp.after


def test_compare_fixing_false_negative_raises_recall():
    truth = GroundTruth({"a": "bot", "b": "bot", "h": "human"})
    before = preds("a", B, B, H) + preds("b", B) + preds("h", H, H)
    after = apply_wocp(before)
    comp = compare_models(before, after, truth)
    assert comp.before.matrix.fn == 1 and comp.after.matrix.fn == 0
    assert comp.after.recall > comp.before.recall
    assert comp.flips.human_to_bot_correct == 1


def test_compare_majority_wrong_human_adds_false_positive():
    truth = GroundTruth({"a": "bot", "h": "human"})
    before = preds("a", B, B) + preds("h", B, B, H)
    after = apply_wocp(before)
    comp = compare_models(before, after, truth)
    assert comp.after.matrix.fp == comp.before.matrix.fp + 1
    assert comp.flips.human_to_bot_wrong == 1


def test_compare_mismatched_pairs():
    truth = GroundTruth({"a": "bot"})
    with pytest.raises(ValueError):
        compare_models(preds("a", B, B), preds("a", B), truth)


def test_report_formats():
    truth = GroundTruth({"a": "bot", "h": "human"})
    before = preds("a", B, H, B) + preds("h", H)
    comp = compare_models(before, apply_wocp(before), truth)
    text = format_comparison(comp)
    header = text.splitlines()[0].split()
    assert header[-8:] == ["TP", "TN", "FP", "FN", "Acc", "Prec", "Recall", "F1"]
    assert "1 human->bot (1 correct)" in text
    assert '"fn": 0' in comparison_json(comp)


def test_format_table_not_applicable():
    text = format_table([("m", metrics(ConfusionMatrix(0, 3, 0, 0)))])
    assert "n/a" in text


def test_export_scatter():
    truth = GroundTruth({"x": "bot", "y": "human"})
    entries = collect(preds("x", B, B, B, H) + preds("y", B, B, U, U, U, U))
    assert export_scatter(entries, truth).splitlines() == [
        "contributor,n_bot,n_human,n_unknown,actual",
        "x,3,1,0,bot",
        "y,2,0,4,human",
    ]
    assert export_scatter([], truth) == "contributor,n_bot,n_human,n_unknown,actual\n"


def test_contributor_level_mode():
    ps = preds("a", B, B, H) + preds("h", B, H) + preds("u", U)
    levels = {p.contributor: p.label for p in contributor_level(ps)}
    assert levels == {"a": B, "h": H, "u": U}


def test_truth_csv():
    truth = parse_truth_csv("contributor,type\nDepBot,bot\nalice,human\n")
    assert truth == {"depbot": B, "alice": H}
    with pytest.raises(ValueError):
        parse_truth_csv("contributor,type\nx,unknown\n")
    with pytest.raises(ValueError):
        parse_truth_csv("login,kind\nx,bot\n")
