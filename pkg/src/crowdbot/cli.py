"""Command-line entry point: ``crowdbot <command> [options]``.

Exit status is 0 on success, 1 on data errors and 2 on usage errors.
Outputs are written atomically (temporary file, then rename).
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field, replace
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from crowdbot import aggregation, evaluation, ingestion, simulation
from crowdbot.classifier import (
    RuleThresholds,
    format_predictions_csv,
    parse_predictions_csv,
    predict_repository,
)
from crowdbot.domain import AggregationConfig, GroundTruth, Label, parse_timestamp

log = logging.getLogger("crowdbot")

COMMANDS = ("fetch", "predict", "aggregate", "evaluate", "simulate", "report")
SALT_ENV = "CROWDBOT_SALT"
ANON_PREFIX = "anon-"


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class CommandPlan:
    command: str
    out: Optional[Path] = None
    corpus: Optional[Path] = None
    predictions: Optional[Path] = None
    truth: Optional[Path] = None
    repos: tuple[str, ...] = ()
    aggregation: AggregationConfig = field(default_factory=AggregationConfig)
    thresholds: RuleThresholds = field(default_factory=RuleThresholds)
    anonymize: bool = False
    strict: bool = False
    seed: int = 0
    options: dict = field(default_factory=dict)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _timestamp(text: str) -> datetime:
    try:
        return parse_timestamp(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid timestamp {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crowdbot", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_required=True):
        p.add_argument("--out", type=Path, required=out_required)
        p.add_argument("--anonymize", action="store_true",
                       help=f"replace logins by salted hashes (salt from ${SALT_ENV})")

    def sampling(p):
        p.add_argument("--since", type=_timestamp, default=ingestion.DEFAULT_SINCE)
        p.add_argument("--max-comments", type=_positive_int, default=100)

    def voting(p):
        p.add_argument("--tie-break", choices=["bot", "human"], default="human")
        p.add_argument("--complete-unknowns", action="store_true")
        p.add_argument("--bot-threshold", type=_positive_int, default=3)

    p = sub.add_parser("fetch", help="download comments from GitHub (token in $GITHUB_TOKEN)")
    p.add_argument("--repos", required=True,
                   help="comma-separated owner/name list, or a file with one per line")
    p.add_argument("--min-total", type=int, default=100,
                   help="skip repositories with fewer issues+PRs (0 disables)")
    p.add_argument("--workers", type=_positive_int, default=4)
    sampling(p)
    common(p)

    p = sub.add_parser("predict", help="classify contributors of an offline corpus")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--min-comments", type=_positive_int, default=10)
    p.add_argument("--strict", action="store_true", help="fail on any rejected record")
    sampling(p)
    common(p)

    p = sub.add_parser("aggregate", help="majority-vote predictions across repositories")
    p.add_argument("--predictions", type=Path, required=True)
    voting(p)
    common(p)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--predictions", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--level", choices=["prediction", "contributor"], default="prediction")
    p.add_argument("--tie-break", choices=["bot", "human"], default="human")
    common(p, out_required=False)

    p = sub.add_parser("simulate", help="sweep synthetic prediction accuracy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=_float_list, default=[0.6, 0.7, 0.8, 0.9, 1.0], dest="p_values")
    p.add_argument("--n-contributors", type=int, default=2000)
    p.add_argument("--bot-prevalence", type=float, default=0.5)
    p.add_argument("--unknown-rate", type=float, default=0.0)
    p.add_argument("--bucket", default="2+")
    p.add_argument("--tie-break", choices=["bot", "human"], default="human")
    common(p)

    p = sub.add_parser("report", help="repository multiplicity, divergence and scatter data")
    p.add_argument("--predictions", type=Path, required=True)
    p.add_argument("--truth", type=Path)
    common(p, out_required=False)
    return parser


def parse_args(argv: Sequence[str]) -> CommandPlan:
    """Parse and validate arguments; raises ``UsageError`` on any problem."""
    ns = build_parser().parse_args(list(argv))
    logging.basicConfig(
        level=logging.DEBUG if ns.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        agg = AggregationConfig(
            tie_break=Label(getattr(ns, "tie_break", "human")),
            complete_unknowns=getattr(ns, "complete_unknowns", False),
            bot_threshold=getattr(ns, "bot_threshold", 3),
            min_comments=getattr(ns, "min_comments", 10),
            max_comments=getattr(ns, "max_comments", 100),
            since=getattr(ns, "since", None),
        )
        thresholds = RuleThresholds(min_comments=agg.min_comments)
    except ValueError as exc:
        raise UsageError(f"invalid option: {exc}") from None

    plan = CommandPlan(
        command=ns.command,
        out=ns.out,
        aggregation=agg,
        thresholds=thresholds,
        anonymize=ns.anonymize,
        strict=getattr(ns, "strict", False),
        seed=getattr(ns, "seed", 0),
    )
    if ns.command == "fetch":
        plan.repos = _parse_repos(ns.repos)
        plan.options.update(min_total=ns.min_total, workers=ns.workers)
    elif ns.command == "predict":
        plan.corpus = ns.corpus
    elif ns.command in ("aggregate", "evaluate", "report"):
        plan.predictions = ns.predictions
        plan.truth = getattr(ns, "truth", None)
        if ns.command == "evaluate":
            plan.options["level"] = ns.level
    elif ns.command == "simulate":
        try:
            plan.options["configs"] = [
                simulation.SimConfig(
                    n_contributors=ns.n_contributors,
                    bot_prevalence=ns.bot_prevalence,
                    p=p,
                    unknown_rate=ns.unknown_rate,
                    seed=ns.seed,
                    tie_break=agg.tie_break,
                )
                for p in ns.p_values
            ]
            simulation.bucket_range(ns.bucket.replace("all", "1+"), 10**9)
        except ValueError as exc:
            raise UsageError(f"invalid option: {exc}") from None
        plan.options["bucket"] = ns.bucket
    return plan


def _parse_repos(text: str) -> tuple[str, ...]:
    path = Path(text)
    if path.is_file():
        items = path.read_text(encoding="utf-8").split()
    else:
        items = text.split(",")
    repos = tuple(r.strip() for r in items if r.strip() and not r.startswith("#"))
    if not repos:
        raise UsageError("--repos lists no repositories")
    return repos


def anonymize_login(login: str, salt: Optional[str] = None) -> str:
    """Stable salted pseudonym for a login; already-pseudonymized logins pass through."""
    if login.startswith(ANON_PREFIX):
        return login
    salt = os.environ.get(SALT_ENV, "") if salt is None else salt
    digest = hashlib.sha256(f"{salt}\0{login.lower()}".encode()).hexdigest()
    return ANON_PREFIX + digest[:12]


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _load_predictions(plan: CommandPlan):
    try:
        preds = parse_predictions_csv(_read_text(plan.predictions))
    except ValueError as exc:
        raise DataError(f"{plan.predictions}: {exc}") from None
    if plan.anonymize:
        preds = [replace(p, contributor=anonymize_login(p.contributor)) for p in preds]
    return preds


def _load_truth(plan: CommandPlan) -> GroundTruth:
    try:
        truth = evaluation.parse_truth_csv(_read_text(plan.truth))
    except ValueError as exc:
        raise DataError(f"{plan.truth}: {exc}") from None
    if plan.anonymize:
        truth = GroundTruth({anonymize_login(k): v for k, v in truth.items()})
    return truth


def _cmd_fetch(plan: CommandPlan) -> int:
    fplan = ingestion.FetchPlan(
        repositories=plan.repos,
        since=plan.aggregation.since or ingestion.DEFAULT_SINCE,
        max_comments_per_contributor=plan.aggregation.max_comments,
        min_total=plan.options.get("min_total", 0),
        workers=plan.options.get("workers", 4),
    )
    try:
        corpus, report = ingestion.fetch_comments(fplan)
    except ingestion.AuthenticationError as exc:
        raise DataError(str(exc)) from None
    if plan.anonymize:
        corpus = [replace(c, contributor=anonymize_login(c.contributor)) for c in corpus]
    buf = io.StringIO()
    ingestion.write_corpus(corpus, buf)
    atomic_write(plan.out, buf.getvalue())
    sidecar = plan.out.with_name(plan.out.name + ".report.json")
    atomic_write(sidecar, json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    print(report.summary(), file=sys.stderr)
    return 1 if report.failures else 0


def _cmd_predict(plan: CommandPlan) -> int:
    try:
        corpus, errors = ingestion.load_corpus(
            plan.corpus, plan.aggregation.since, plan.aggregation.max_comments
        )
    except OSError as exc:
        raise DataError(f"cannot read {plan.corpus}: {exc.strerror}") from None
    for err in errors:
        print(f"{plan.corpus}: {err}", file=sys.stderr)
    if errors and plan.strict:
        return 1
    preds = predict_repository(corpus, plan.thresholds)
    if plan.anonymize:
        preds = [replace(p, contributor=anonymize_login(p.contributor)) for p in preds]
    atomic_write(plan.out, format_predictions_csv(preds))
    return 0


def _cmd_aggregate(plan: CommandPlan) -> int:
    preds = aggregation.revert(_load_predictions(plan))
    try:
        revised = aggregation.aggregate(preds, plan.aggregation)
    except aggregation.DuplicatePredictionError as exc:
        raise DataError(str(exc)) from None
    atomic_write(plan.out, aggregation.format_aggregated_csv(revised))
    return 0


def _cmd_evaluate(plan: CommandPlan) -> int:
    after = _load_predictions(plan)
    truth = _load_truth(plan)
    before = aggregation.revert(after)
    if plan.options.get("level") == "contributor":
        tie = plan.aggregation.tie_break
        before = evaluation.contributor_level(before, tie)
        after = evaluation.contributor_level(after, tie)
    try:
        if any(p.origin.value != "observed" for p in after) or plan.options.get("level") == "contributor":
            comp = evaluation.compare_models(before, after, truth)
            text = evaluation.format_comparison(comp)
            sidecar = evaluation.comparison_json(comp)
        else:
            report = evaluation.metrics(evaluation.confusion(after, truth))
            text = evaluation.format_table([("observed", report)])
            text += f"excluded unknown predictions: {report.excluded_unknowns}\n"
            sidecar = json.dumps({"observed": evaluation.report_json(report)}, indent=2, sort_keys=True) + "\n"
    except evaluation.MissingTruthError as exc:
        raise DataError(str(exc)) from None
    except ValueError as exc:
        raise DataError(str(exc)) from None
    sys.stdout.write(text)
    if plan.out:
        atomic_write(plan.out, text)
        atomic_write(plan.out.with_name(plan.out.name + ".json"), sidecar)
    return 0


def _cmd_simulate(plan: CommandPlan) -> int:
    rows = simulation.sweep(plan.options["configs"], plan.options["bucket"])
    atomic_write(plan.out, simulation.format_sweep_csv(rows))
    return 0


def _cmd_report(plan: CommandPlan) -> int:
    preds = _load_predictions(plan)
    try:
        entries = aggregation.collect(preds)
    except aggregation.DuplicatePredictionError as exc:
        raise DataError(str(exc)) from None
    hist = aggregation.repo_multiplicity_histogram(entries)
    total = sum(n for n, _ in hist.values())
    lines = ["repositories  contributors  percent"]
    for bucket, (n, _) in hist.items():
        pct_text = evaluation.round_half_up(Fraction(100 * n, total)) if total else "0.0"
        lines.append(f"{bucket:>12}  {n:>12}  {pct_text:>6}%")
    summary = aggregation.divergence_report(entries).summary
    lines.append("")
    lines.extend(f"{status:<18} {n}" for status, n in summary.items())
    sys.stdout.write("\n".join(lines) + "\n")
    if plan.out:
        truth = _load_truth(plan) if plan.truth else GroundTruth()
        atomic_write(plan.out, evaluation.export_scatter(entries, truth))
    return 0


HANDLERS = {
    "fetch": _cmd_fetch,
    "predict": _cmd_predict,
    "aggregate": _cmd_aggregate,
    "evaluate": _cmd_evaluate,
    "simulate": _cmd_simulate,
    "report": _cmd_report,
}


def run(plan: CommandPlan) -> int:
    try:
        return HANDLERS[plan.command](plan)
    except DataError as exc:
        print(f"crowdbot {plan.command}: {exc}", file=sys.stderr)
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        plan = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    return run(plan)


if __name__ == "__main__":
    sys.exit(main())
