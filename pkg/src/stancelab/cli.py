"""Command-line entry points: synth, train, predict, evaluate, experiment,
analyze.

Every command is reproducible from its flags plus --seed. Exit codes:
0 success, 1 usage error, 2 data error, 3 experiment-cell failure.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Sequence

from .analysis import (
    ConsistencyReport,
    top_features,
    topn_overlap_curve,
    network_overlap,
    user_consistency,
    write_consistency_csv,
    write_curves_csv,
    write_overlap_csv,
    write_rankings_csv,
)
from .corpus import (
    CorpusError,
    Dataset,
    StanceLabel,
    join,
    load_network_profiles,
    load_semeval_tsv,
)
from .features import FeatureSetSelector
from .linsvm import LinearModel, TrainConfig, load_bundle, save_bundle
from .pipeline import predict_dataset, run_cell, train_topic_models
from .scoring import (
    EvalReport,
    kfold,
    mann_whitney_u,
    minority_recall_flags,
    paired_t_test,
    read_label_lines,
    read_predictions,
    render_report,
    score_semeval,
    write_confusion_csv,
    write_predictions,
    write_report_csv,
)
from .synth import SynthConfig, write_corpus

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CELL = 3

OVERLAP_PAIRS = (
    ("in_mentions", "pn_mentions"),
    ("in_mentions", "cn_friends"),
    ("pn_mentions", "cn_friends"),
    ("in_domains", "pn_domains"),
)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _slugify(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "", name.lower()) or "topic"


def _unique_slugs(topics: Sequence[str]) -> dict[str, str]:
    slugs: dict[str, str] = {}
    used: set[str] = set()
    for topic in topics:
        slug = _slugify(topic)
        candidate, i = slug, 2
        while candidate in used:
            candidate = f"{slug}{i}"
            i += 1
        used.add(candidate)
        slugs[topic] = candidate
    return slugs


def _parse_selectors(text: str) -> list[FeatureSetSelector]:
    selectors = [FeatureSetSelector.parse(part) for part in text.split(",") if part]
    if not selectors:
        raise ValueError("no selectors given")
    return selectors


def _parse_prior(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError("prior needs three comma-separated weights")
    return parts[0], parts[1], parts[2]


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        C=args.C,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
        loss=args.loss,
    )


def _load_dataset(
    tweets_path: str,
    profiles_path: str | None,
    require_profile: bool,
) -> Dataset:
    instances = load_semeval_tsv(tweets_path)
    profiles: dict = {}
    if profiles_path:
        profiles, _ = load_network_profiles(profiles_path)
    dataset, dropped = join(instances, profiles, require_profile=require_profile)
    if dropped:
        print(f"dropped {dropped} instances without profiles", file=sys.stderr)
    return dataset


def _check_profiles_flag(
    parser: argparse.ArgumentParser,
    selectors: Sequence[FeatureSetSelector],
    profiles_path: str | None,
) -> None:
    if any(s.uses_profiles for s in selectors) and not profiles_path:
        parser.error("network selectors require --profiles")


def _load_models(bundles_dir: str) -> dict[str, LinearModel]:
    root = Path(bundles_dir)
    models: dict[str, LinearModel] = {}
    candidates = [root] if (root / "metadata.json").exists() else sorted(root.iterdir())
    for entry in candidates:
        if not entry.is_dir() or not (entry / "metadata.json").exists():
            continue
        model, meta = load_bundle(entry)
        topic = meta.get("topic", "")
        if topic in models:
            raise CorpusError(f"duplicate bundle for topic {topic!r} in {root}")
        models[topic] = model
    if not models:
        raise CorpusError(f"no model bundles found under {bundles_dir}")
    return models


# ---------------------------------------------------------------------------
# Subcommands.


def _cmd_synth(args: argparse.Namespace) -> int:
    config = SynthConfig(
        topics=tuple(t.strip() for t in args.topics.split(",") if t.strip()),
        users_per_topic=args.users_per_topic,
        tweets_per_user=args.tweets_per_user,
        stance_prior=_parse_prior(args.prior),
        homophily=args.homophily,
        text_signal=args.text_signal,
        community_pool_size=args.community_pool,
        shared_pool_size=args.shared_pool,
        items_per_set=args.items_per_set,
        silent_fraction=args.silent_fraction,
        tokens_per_tweet=args.tokens_per_tweet,
        generic_vocab_size=args.vocab,
        seed=args.seed,
    )
    paths = write_corpus(config, args.out)
    for name in ("train", "test", "profiles", "manifest"):
        print(f"{name}: {paths[name]}")
    return EXIT_OK


def _cmd_train(args: argparse.Namespace) -> int:
    selector = FeatureSetSelector.parse(args.selector)
    _check_profiles_flag(args.parser, [selector], args.profiles)
    train = _load_dataset(args.tweets, args.profiles, args.require_profile)
    config = _train_config(args)
    models = train_topic_models(train, selector, args.mode, config, args.min_df)
    slugs = _unique_slugs(train.topics)
    out = Path(args.out)
    for topic, model in models.items():
        bundle_dir = out / f"{slugs[topic]}__{selector}__{args.mode}"
        save_bundle(model, bundle_dir, topic=topic)
        print(f"bundle: {bundle_dir}")
    return EXIT_OK


def _cmd_predict(args: argparse.Namespace) -> int:
    models = _load_models(args.bundles)
    needs_profiles = any(m.selector.uses_profiles for m in models.values())
    if needs_profiles and not args.profiles:
        args.parser.error("these bundles use network features; pass --profiles")
    dataset = _load_dataset(args.tweets, args.profiles, args.require_profile)
    predictions = predict_dataset(models, dataset)
    write_predictions(args.out, dataset.instances, predictions)
    print(f"predictions: {args.out}")
    return EXIT_OK


def _predictions_from_source(
    args: argparse.Namespace, source: str
) -> tuple[list[str], list[str], list[StanceLabel], list[StanceLabel]]:
    """Returns aligned (ids, topics, gold, pred) from a predictions TSV or a
    bundles directory."""
    path = Path(source)
    if path.is_dir():
        if not args.tweets:
            args.parser.error("scoring a bundles directory requires --tweets")
        models = _load_models(source)
        needs_profiles = any(m.selector.uses_profiles for m in models.values())
        if needs_profiles and not args.profiles:
            args.parser.error("these bundles use network features; pass --profiles")
        dataset = _load_dataset(args.tweets, args.profiles, False)
        predictions = predict_dataset(models, dataset)
        ids = [inst.tweet_id for inst in dataset.instances]
        topics = [inst.topic for inst in dataset.instances]
        gold = [inst.label for inst in dataset.instances]
        return ids, topics, gold, predictions
    return read_predictions(source)


def _fold_scores(
    topics: Sequence[str],
    gold: Sequence[StanceLabel],
    pred: Sequence[StanceLabel],
    k: int,
    seed: int,
) -> list[float]:
    plan = kfold(len(gold), k, seed)
    scores = []
    for fold in range(k):
        idx = plan.fold_indices(fold)
        report = score_semeval(
            [gold[i] for i in idx], [pred[i] for i in idx], [topics[i] for i in idx]
        )
        scores.append(report.overall.f_avg)
    return scores


def _cmd_evaluate(args: argparse.Namespace) -> int:
    if args.predictions:
        ids, topics, gold, pred = read_predictions(args.predictions)
    elif args.gold and args.pred_labels:
        instances = load_semeval_tsv(args.gold)
        pred = read_label_lines(args.pred_labels)
        if len(pred) != len(instances):
            raise CorpusError(
                f"{len(pred)} predicted labels for {len(instances)} gold instances"
            )
        ids = [inst.tweet_id for inst in instances]
        topics = [inst.topic for inst in instances]
        gold = [inst.label for inst in instances]
    elif args.bundles:
        ids, topics, gold, pred = _predictions_from_source(args, args.bundles)
    else:
        args.parser.error(
            "provide --predictions, or --gold with --pred-labels, or --bundles"
        )
    report = score_semeval(gold, pred, topics)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(render_report(report), encoding="utf-8")
    write_report_csv(report, out / "report.csv")
    write_confusion_csv(report.confusion, out / "confusion.csv")
    print(render_report(report), end="")
    if args.compare:
        cmp_ids, cmp_topics, cmp_gold, cmp_pred = _predictions_from_source(
            args, args.compare
        )
        if cmp_ids != ids:
            raise CorpusError("--compare predictions do not align by instance id")
        lines = [f"pair_unit={args.pair_unit}"]
        if args.pair_unit == "topic":
            names = sorted(report.per_topic)
            cmp_report = score_semeval(cmp_gold, cmp_pred, cmp_topics)
            a = [report.per_topic[t].f_avg for t in names]
            b = [cmp_report.per_topic[t].f_avg for t in names]
        else:
            a = _fold_scores(topics, gold, pred, args.folds, args.seed)
            b = _fold_scores(cmp_topics, cmp_gold, cmp_pred, args.folds, args.seed)
        lines.append(f"n_units={len(a)}")
        lines.append("f_avg_a=" + ",".join(f"{v:.4f}" for v in a))
        lines.append("f_avg_b=" + ",".join(f"{v:.4f}" for v in b))
        try:
            lines.append(f"t_test_p={paired_t_test(a, b):.6f}")
        except ValueError as exc:
            lines.append(f"t_test_p=n/a ({exc})")
        u = mann_whitney_u(a, b)
        lines.append(f"u_test_p={u.p_value:.6f} ({u.method})")
        text = "\n".join(lines) + "\n"
        (out / "significance.txt").write_text(text, encoding="utf-8")
        print(text, end="")
    return EXIT_OK


@dataclass
class _CellResult:
    selector: FeatureSetSelector
    mode: str
    report: EvalReport | None = None
    predictions: list[StanceLabel] | None = None
    models: dict[str, LinearModel] | None = None
    error: str = ""


def _run_experiment_cell(
    train: Dataset,
    test: Dataset,
    selector: FeatureSetSelector,
    mode: str,
    config: TrainConfig,
    min_df: int,
) -> _CellResult:
    result = _CellResult(selector=selector, mode=mode)
    try:
        models, report, predictions = run_cell(
            train, test, selector, mode, config, min_df=min_df
        )
        result.models = models
        result.report = report
        result.predictions = predictions
    except Exception as exc:  # cell failures are recorded, not fatal
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def _write_master_csv(
    path: Path, results: Sequence[_CellResult], topics: Sequence[str]
) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["selector", "mode", "status"]
            + [f"f_avg[{t}]" for t in topics]
            + ["f_favor", "f_against", "f_avg", "collapsed_classes"]
        )
        for result in results:
            row = [str(result.selector), result.mode]
            if result.report is None:
                row += [f"failed: {result.error}"] + [""] * (len(topics) + 4)
            else:
                report = result.report
                row.append("ok")
                for topic in topics:
                    scores = report.per_topic.get(topic)
                    row.append(f"{scores.f_avg:.4f}" if scores else "")
                row += [
                    f"{report.overall.f_favor:.4f}",
                    f"{report.overall.f_against:.4f}",
                    f"{report.overall.f_avg:.4f}",
                    "+".join(c.value for c in minority_recall_flags(report.confusion)),
                ]
            writer.writerow(row)


def _experiment_curves(
    results: dict[tuple[str, str], _CellResult],
    mode: str,
    topics: Sequence[str],
    n_max: int,
) -> dict[str, list[tuple[int, float]]]:
    """Top-N overlap curves across the single-family account models
    (IN_AT, PN_AT, CN_FR) and the domain pair (IN_DM, PN_DM)."""
    curves: dict[str, list[tuple[int, float]]] = {}

    def ranking(flag: str, topic: str, cls: StanceLabel):
        result = results.get((flag, mode))
        if result is None or result.models is None:
            return None
        model = result.models.get(topic)
        if model is None or cls not in model.classes:
            return None
        return top_features(model, cls, topic, n_max)

    for topic in topics:
        for cls in (StanceLabel.FAVOR, StanceLabel.AGAINST):
            trio = [(f, ranking(f, topic, cls)) for f in ("IN_AT", "PN_AT", "CN_FR")]
            if all(r is not None and r.entries for _, r in trio):
                key = f"IN_AT+PN_AT+CN_FR | {cls.value} | {topic}"
                curves[key] = topn_overlap_curve(
                    trio[0][1], trio[1][1], trio[2][1], n_max=n_max
                )
                for (name_l, left), (name_r, right) in combinations(trio, 2):
                    key = f"{name_l} vs {name_r} | {cls.value} | {topic}"
                    curves[key] = topn_overlap_curve(left, right, n_max=n_max)
            duo = [ranking(f, topic, cls) for f in ("IN_DM", "PN_DM")]
            if all(r is not None and r.entries for r in duo):
                key = f"IN_DM vs PN_DM | {cls.value} | {topic}"
                curves[key] = topn_overlap_curve(duo[0], duo[1], n_max=n_max)
    return curves


def _cmd_experiment(args: argparse.Namespace) -> int:
    selectors = _parse_selectors(args.selectors)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    for mode in modes:
        if mode not in ("ternary", "binary"):
            args.parser.error(f"unknown mode {mode!r}")
    if not modes:
        args.parser.error("no modes given")
    _check_profiles_flag(args.parser, selectors, args.profiles)
    train = _load_dataset(args.tweets, args.profiles, args.require_profile)
    test = _load_dataset(args.test, args.profiles, args.require_profile)
    config = _train_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cells = [(sel, mode) for sel in selectors for mode in modes]
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(
                    _run_experiment_cell, train, test, sel, mode, config, args.min_df
                )
                for sel, mode in cells
            ]
            results = [f.result() for f in futures]
    else:
        results = [
            _run_experiment_cell(train, test, sel, mode, config, args.min_df)
            for sel, mode in cells
        ]
    results.sort(key=lambda r: (str(r.selector), r.mode))
    by_key = {(str(r.selector), r.mode): r for r in results}

    slugs = _unique_slugs(train.topics)
    consistency: dict[str, ConsistencyReport] = {}
    for result in results:
        name = f"{result.selector}__{result.mode}"
        cell_dir = out / "cells" / name
        if result.report is None:
            continue
        cell_dir.mkdir(parents=True, exist_ok=True)
        (cell_dir / "report.txt").write_text(
            render_report(result.report, title=name), encoding="utf-8"
        )
        write_report_csv(result.report, cell_dir / "report.csv")
        write_confusion_csv(result.report.confusion, cell_dir / "confusion.csv")
        write_predictions(
            cell_dir / "predictions.tsv", test.instances, result.predictions
        )
        for topic, model in result.models.items():
            save_bundle(
                model, out / "bundles" / name / slugs[topic], topic=topic
            )
        rankings = [
            top_features(model, cls, topic, args.top_n)
            for topic, model in result.models.items()
            for cls in model.classes
        ]
        analysis_dir = out / "analysis"
        analysis_dir.mkdir(parents=True, exist_ok=True)
        write_rankings_csv(rankings, analysis_dir / f"top_features__{name}.csv")
        consistency[name] = user_consistency(test, result.predictions)

    analysis_dir = out / "analysis"
    analysis_dir.mkdir(parents=True, exist_ok=True)
    all_profiles = {**train.profiles, **test.profiles}
    if any(p for p in all_profiles.values()):
        for field_a, field_b in OVERLAP_PAIRS:
            dist = network_overlap(all_profiles, (field_a, field_b))
            write_overlap_csv(
                dist, analysis_dir / f"overlap__{field_a}__{field_b}.csv"
            )
    if consistency:
        write_consistency_csv(consistency, analysis_dir / "user_consistency.csv")
    for mode in modes:
        curves = _experiment_curves(by_key, mode, train.topics, args.curve_max)
        if curves:
            write_curves_csv(curves, analysis_dir / f"topn_curves__{mode}.csv")

    _write_master_csv(out / "master.csv", results, train.topics)
    print(f"master: {out / 'master.csv'}")
    failed = [r for r in results if r.report is None]
    for result in failed:
        print(
            f"cell failed: {result.selector} {result.mode}: {result.error}",
            file=sys.stderr,
        )
    return EXIT_CELL if failed else EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    did_anything = False
    if args.profiles:
        profiles, _ = load_network_profiles(args.profiles)
        if not profiles:
            raise CorpusError(f"{args.profiles}: no profiles")
        for field_a, field_b in OVERLAP_PAIRS:
            dist = network_overlap(profiles, (field_a, field_b))
            write_overlap_csv(dist, out / f"overlap__{field_a}__{field_b}.csv")
        did_anything = True
    if args.bundles:
        models = _load_models(args.bundles)
        rankings = [
            top_features(model, cls, topic, args.top_n)
            for topic, model in sorted(models.items())
            for cls in model.classes
        ]
        write_rankings_csv(rankings, out / "top_features.csv")
        did_anything = True
    if args.predictions:
        if not args.tweets:
            args.parser.error("--predictions needs --tweets for author grouping")
        dataset = _load_dataset(args.tweets, args.profiles, False)
        _, _, _, pred = read_predictions(args.predictions)
        if len(pred) != len(dataset.instances):
            raise CorpusError("predictions do not align with tweets file")
        report = user_consistency(dataset, pred)
        write_consistency_csv({"predictions": report}, out / "user_consistency.csv")
        did_anything = True
    if not did_anything:
        args.parser.error("nothing to analyze: pass --profiles, --bundles, "
                          "or --predictions")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser wiring.


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--C", type=float, default=1.0, help="SVM cost parameter")
    parser.add_argument("--tol", type=float, default=1e-4, help="dual stopping tolerance")
    parser.add_argument("--max-iter", type=int, default=1000, help="epoch cap")
    parser.add_argument("--loss", choices=("hinge", "squared_hinge"), default="hinge")
    parser.add_argument("--min-df", type=int, default=1,
                        help="minimum training document frequency per feature")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stancelab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--topics", default="alpha,beta,gamma")
    p.add_argument("--users-per-topic", type=int, default=200)
    p.add_argument("--tweets-per-user", type=int, default=3)
    p.add_argument("--prior", default="0.4,0.4,0.2",
                   help="against,favor,none weights")
    p.add_argument("--homophily", type=float, default=0.9)
    p.add_argument("--text-signal", type=float, default=0.5)
    p.add_argument("--silent-fraction", type=float, default=0.0)
    p.add_argument("--community-pool", type=int, default=60)
    p.add_argument("--shared-pool", type=int, default=120)
    p.add_argument("--items-per-set", type=int, default=12)
    p.add_argument("--tokens-per-tweet", type=int, default=8)
    p.add_argument("--vocab", type=int, default=200)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train per-topic models into bundles")
    p.add_argument("--tweets", required=True)
    p.add_argument("--profiles")
    p.add_argument("--selector", required=True,
                   help="e.g. TXT or IN_AT+IN_DM or TXT+IN_AT+IN_DM")
    p.add_argument("--mode", choices=("ternary", "binary"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--require-profile", action="store_true",
                   help="drop instances whose author has no profile")
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="predict with saved bundles")
    p.add_argument("--bundles", required=True)
    p.add_argument("--tweets", required=True)
    p.add_argument("--profiles")
    p.add_argument("--out", required=True)
    p.add_argument("--require-profile", action="store_true")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions the official way")
    p.add_argument("--predictions", help="TSV with ID, Target, Gold, Pred")
    p.add_argument("--gold", help="gold tweets TSV (with --pred-labels)")
    p.add_argument("--pred-labels", help="one predicted label per line")
    p.add_argument("--bundles", help="bundle directory to score (with --tweets)")
    p.add_argument("--tweets")
    p.add_argument("--profiles")
    p.add_argument("--out", required=True)
    p.add_argument("--compare",
                   help="second predictions TSV or bundles dir for significance tests")
    p.add_argument("--pair-unit", choices=("topic", "fold"), default="topic")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("experiment", help="run the full selector/mode matrix")
    p.add_argument("--tweets", required=True, help="training tweets TSV")
    p.add_argument("--test", required=True, help="test tweets TSV")
    p.add_argument("--profiles")
    p.add_argument("--selectors", required=True, help="comma-separated selector list")
    p.add_argument("--modes", default="ternary,binary")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--top-n", type=int, default=20)
    p.add_argument("--curve-max", type=int, default=200)
    p.add_argument("--require-profile", action="store_true")
    _add_train_flags(p)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("analyze", help="overlap, rankings, consistency reports")
    p.add_argument("--profiles")
    p.add_argument("--bundles")
    p.add_argument("--predictions")
    p.add_argument("--tweets")
    p.add_argument("--out", required=True)
    p.add_argument("--top-n", type=int, default=20)
    p.set_defaults(func=_cmd_analyze)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.parser = parser
    try:
        return args.func(args)
    except (CorpusError, FileNotFoundError, NotADirectoryError, ValueError) as exc:
        print(f"stancelab: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
