"""Command-line entry points.

Subcommands: ingest, synth, gen-batch, run-schedule, evaluate, serve.
Every command exits 0 on success and 2 with a one-line diagnostic on
error; outputs are deterministic for fixed inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, PipelineConfig, ServiceConfig, load_config
from .corpus import CorpusError, CorpusPaths, format_utc, load_corpus, parse_utc, write_corpus
from .evalkit import (
    FEEDBACK_FILE,
    FeedbackLog,
    ImpactWindowError,
    InsufficientDataError,
    build_metrics_report,
    impact_analysis,
    metrics_text,
)
from .pipeline import (
    BATCHES_FILE,
    LEDGER_FILE,
    BatchStore,
    RecommendationLedger,
    generate_batch,
    run_schedule,
)
from .synth import generate_synthetic


def _add_data_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", default="data", help="data directory (default: data)")


def _cmd_ingest(args: argparse.Namespace) -> int:
    corpus = load_corpus(CorpusPaths.in_dir(args.dir))
    counts = corpus.counts()
    print(
        "valid corpus: "
        + ", ".join(f"{counts[k]} {k}" for k in sorted(counts))
        + f", as_of {format_utc(corpus.as_of)}"
    )
    if args.out:
        write_corpus(corpus, args.out)
        print(f"normalized copy written to {args.out}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    corpus = generate_synthetic(
        args.editors, args.projects, args.categories, args.weeks, args.seed
    )
    write_corpus(corpus, args.out)
    counts = corpus.counts()
    print(
        f"wrote {args.out}: "
        + ", ".join(f"{counts[k]} {k}" for k in sorted(counts))
        + f", as_of {format_utc(corpus.as_of)}"
    )
    return 0


def _load_pipeline_config(path: str | None) -> PipelineConfig:
    return load_config(path)


def _cmd_gen_batch(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args.config)
    data = Path(args.data)
    corpus = load_corpus(CorpusPaths.in_dir(data))
    as_of = parse_utc(args.as_of)
    if as_of > corpus.as_of:
        raise CorpusError(
            f"as_of {format_utc(as_of)} is beyond corpus coverage {format_utc(corpus.as_of)}"
        )
    store = BatchStore(data / BATCHES_FILE)
    ledger = RecommendationLedger(data / LEDGER_FILE)
    for project_id in sorted(corpus.projects):
        batch = generate_batch(project_id, corpus, as_of, ledger, config, store=store)
        total = sum(len(c) for c in batch.cells.values())
        print(f"{batch.batch_id}: {total} candidates")
    return 0


def _cmd_run_schedule(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args.config)
    data = Path(args.data)
    corpus = load_corpus(CorpusPaths.in_dir(data))
    start = parse_utc(args.start)
    store = BatchStore(data / BATCHES_FILE)
    ledger = RecommendationLedger(data / LEDGER_FILE)
    batches = run_schedule(corpus, start, args.weeks, ledger, config, store=store)
    issued = len(ledger)
    print(f"{len(batches)} batches over {args.weeks} week(s); {issued} recommendations issued")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _load_pipeline_config(args.config)
    data = Path(args.data)
    corpus = load_corpus(CorpusPaths.in_dir(data))
    feedback_path = data / FEEDBACK_FILE
    feedback = FeedbackLog(feedback_path) if feedback_path.exists() else FeedbackLog()
    metrics = build_metrics_report(feedback.records)
    window_days = args.window_days or config.impact_window_days
    try:
        impact = impact_analysis(
            feedback.records, corpus, window_days, config=config
        ).to_json()
    except (InsufficientDataError, ImpactWindowError) as exc:
        impact = {"skipped": str(exc), "window_days": window_days}
    report = {"metrics": metrics, "impact": impact}
    print(metrics_text(metrics))
    if "estimate" in impact:
        print(
            f"impact: estimate {impact['estimate']:.3f} over {impact['n_treated']} "
            f"invited editor(s), outside change {impact['outside_change_mean']:.3f}"
        )
    else:
        print(f"impact: skipped ({impact['skipped']})")
    if args.out:
        out_path = Path(args.out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(
            json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8",
        )
        print(f"report written to {out_path}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    service_config = ServiceConfig(
        data_dir=Path(args.data), port=args.port, token=args.token
    ).with_env()
    pipeline_config = _load_pipeline_config(args.config)
    serve(service_config, pipeline_config, ui_dir=args.ui_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wikirec",
        description="project newcomer recommendation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus directory")
    p.add_argument("dir", help="directory holding the five corpus files")
    p.add_argument("--out", default=None, help="write a normalized copy here")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a deterministic synthetic corpus")
    p.add_argument("--editors", type=int, required=True)
    p.add_argument("--projects", type=int, required=True)
    p.add_argument("--categories", type=int, required=True)
    p.add_argument("--weeks", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("gen-batch", help="generate one batch per project")
    p.add_argument("--as-of", dest="as_of", required=True, help="UTC instant, e.g. 2022-03-07T00:00:00Z")
    p.add_argument("--config", default=None, help="pipeline config file")
    _add_data_arg(p)
    p.set_defaults(func=_cmd_gen_batch)

    p = sub.add_parser("run-schedule", help="generate weekly batches for every project")
    p.add_argument("--start", required=True, help="first as_of (UTC)")
    p.add_argument("--weeks", type=int, required=True)
    p.add_argument("--config", default=None)
    _add_data_arg(p)
    p.set_defaults(func=_cmd_run_schedule)

    p = sub.add_parser("evaluate", help="compute metrics and impact from recorded feedback")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.add_argument("--config", default=None)
    p.add_argument("--window-days", dest="window_days", type=int, default=None)
    _add_data_arg(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--port", type=int, default=8340)
    p.add_argument("--token", default="")
    p.add_argument("--config", default=None)
    p.add_argument("--ui-dir", dest="ui_dir", default=None, help="static UI directory to mount at /ui")
    _add_data_arg(p)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
