"""Command line interface.

Subcommands: train, compare, evaluate, predict, report. Exit codes:
0 success, 1 data/config error, 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from .artifact import load_model, save_model
from .config import CLASSIFIER_CHOICES, FEATURE_MODES, build_config, parse_config_file
from .errors import UrlSentryError
from .evaluation import (
    ComparisonTable,
    comparison_csv,
    render_bar_chart,
    render_comparison_report,
    render_confusion,
    render_metrics,
)
from .runner import (
    dataset_fingerprint,
    evaluate_artifact,
    filter_predictions,
    load_labeled_dataset,
    make_verdicts,
    run_compare,
    train_artifact,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urlsentry",
        description="Lexical malicious-URL detection: train, compare, and filter.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--data", help="input CSV (url,type) or URL list file")
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--model", help="model artifact path")
        p.add_argument("--seed", type=int, help="random seed (default 42)")
        p.add_argument("--threshold", type=float, help="confidence threshold in [0,1]")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--features", choices=FEATURE_MODES, help="feature mode")
        p.add_argument("--classifier", choices=CLASSIFIER_CHOICES, help="classifier kind")

    p_train = sub.add_parser("train", help="train one classifier and write an artifact")
    add_common(p_train)

    p_compare = sub.add_parser("compare", help="train all five classifiers head-to-head")
    add_common(p_compare)

    p_eval = sub.add_parser("evaluate", help="score an artifact on a labeled CSV")
    add_common(p_eval)

    p_pred = sub.add_parser("predict", help="classify URLs and emit a safe list")
    add_common(p_pred)
    p_pred.add_argument("urls", nargs="*", help="URLs given directly on the command line")

    p_report = sub.add_parser("report", help="re-render chart/report from a comparison CSV")
    add_common(p_report)
    return parser


def _config_from_args(args: argparse.Namespace):
    file_values = parse_config_file(args.config) if args.config else {}
    flags = {
        "data": args.data,
        "model": args.model,
        "seed": args.seed,
        "threshold": args.threshold,
        "out": args.out,
        "features": args.features,
        "classifier": args.classifier,
    }
    return build_config(file_values, flags)


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def cmd_train(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.data_path is None:
        raise UrlSentryError("train requires --data <csv>")
    if config.classifier == "all":
        # an artifact holds exactly one classifier
        print("classifier 'all' applies to compare; training random forest", file=sys.stderr)
        config.classifier = "rf"

    stage = "load"
    try:
        dataset, report = load_labeled_dataset(config.data_path, config)
        stage = "train"
        artifact = train_artifact(
            dataset, config, fingerprint=dataset_fingerprint(config.data_path)
        )
        stage = "save"
        out_dir = _ensure_out(config.out_dir)
        model_path = config.model_path or os.path.join(out_dir, "model.json")
        save_model(artifact, model_path)
    except UrlSentryError as exc:
        raise UrlSentryError(f"stage {stage}: {type(exc).__name__}: {exc}") from exc

    n = dataset.n_rows
    n_mal = int(dataset.labels.sum())
    print(f"trained classifier={config.classifier} features={config.feature_mode}")
    print(
        f"rows used: {n} ({n - n_mal} benign / {n_mal} malicious), "
        f"dropped: {report.dropped_empty} empty, {report.dropped_duplicates} duplicates"
    )
    print(f"seed: {config.seed}")
    print(f"artifact written to {model_path}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.data_path is None:
        raise UrlSentryError("compare requires --data <csv>")
    dataset, _ = load_labeled_dataset(config.data_path, config)
    table, matrices = run_compare(dataset, config)

    out_dir = _ensure_out(config.out_dir)
    csv_path = os.path.join(out_dir, "comparison.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(comparison_csv(table))
    svg_path = os.path.join(out_dir, "accuracy_chart.svg")
    render_bar_chart(table, svg_path)
    report_path = os.path.join(out_dir, "report.txt")
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_comparison_report(table, matrices))

    for i, (name, acc) in enumerate(table.rows, start=1):
        print(f"{i}  {name:<20} {acc:.6f}")
    print(f"wrote {csv_path}, {svg_path}, {report_path}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.model_path is None or config.data_path is None:
        raise UrlSentryError("evaluate requires --model <artifact> and --data <csv>")
    artifact = load_model(config.model_path)
    dataset, _ = load_labeled_dataset(config.data_path, config, spec=artifact.feature_spec)
    cm, metrics = evaluate_artifact(artifact, dataset)
    print(render_confusion(cm, artifact.classifier_kind))
    print(render_metrics(metrics), end="")
    return 0


def _read_url_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def cmd_predict(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.model_path is None:
        raise UrlSentryError("predict requires --model <artifact>")
    raw_inputs = list(args.urls)
    if config.data_path:
        raw_inputs.extend(_read_url_lines(config.data_path))

    urls = []
    for line_no, candidate in enumerate(raw_inputs, start=1):
        if candidate.strip():
            urls.append(candidate.strip())
        else:
            print(f"warning: line {line_no}: empty URL skipped", file=sys.stderr)
    if not urls:
        raise UrlSentryError("no URLs to classify")

    artifact = load_model(config.model_path)
    verdicts = make_verdicts(artifact, urls, config.threshold)
    for v in verdicts:
        print(f"{v.url}\t{v.confidence:.6f}\t{v.label}")

    safe, flagged = filter_predictions(
        [(v.url, v.confidence) for v in verdicts], config.threshold
    )
    out_dir = _ensure_out(config.out_dir)
    safe_path = os.path.join(out_dir, "safe_urls.txt")
    with open(safe_path, "w", encoding="utf-8", newline="\n") as fh:
        for url, _ in safe:
            fh.write(url + "\n")
    print(
        f"{len(flagged)} flagged, {len(safe)} safe "
        f"(threshold {config.threshold}); safe list: {safe_path}",
        file=sys.stderr,
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if config.data_path is None:
        raise UrlSentryError("report requires --data <comparison csv>")
    with open(config.data_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["classifier", "accuracy"]:
            raise UrlSentryError("expected CSV header classifier,accuracy")
        rows = [(row[0], float(row[1])) for row in reader if row]
    if not rows:
        raise UrlSentryError("comparison CSV has no rows")
    table = ComparisonTable(
        rows=rows, split_descriptor=f"from {config.data_path}", seed=config.seed
    )
    out_dir = _ensure_out(config.out_dir)
    svg_path = os.path.join(out_dir, "accuracy_chart.svg")
    render_bar_chart(table, svg_path)
    for i, (name, acc) in enumerate(rows, start=1):
        print(f"{i}  {name:<20} {acc:.6f}")
    print(f"wrote {svg_path}")
    return 0


_COMMANDS = {
    "train": cmd_train,
    "compare": cmd_compare,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UrlSentryError, FileNotFoundError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal error
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
