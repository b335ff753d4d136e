"""Command-line entry point: run, bench, replay, and suggest."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .bench import SUITES, aggregate, run_bench
from .chooser import PendingSet
from .config import ConfigError, load_config
from .driver import RunAbortedError, _make_choice, run
from .gp import Dataset
from .runlog import (
    InvariantViolation,
    LogFormatError,
    RunLog,
    reconstruct_state,
    verify_run_invariants,
    write_summary_csv,
)


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        log = run(cfg)
    except RunAbortedError as exc:
        exc.log.save(out / "events.jsonl")
        print(f"run aborted: {exc}", file=sys.stderr)
        return 1
    log.save(out / "events.jsonl")
    write_summary_csv(log, out / "summary.csv")
    trace = log.best_trace()
    n = len(log.completed_evaluations())
    best = trace[-1] if trace.size else float("nan")
    print(f"completed {n} evaluations; best observed value {best:.6g}")
    print(f"wrote {out / 'events.jsonl'} and {out / 'summary.csv'}")
    return 0


def _cmd_bench(args) -> int:
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    results = run_bench(
        args.suite,
        algorithms,
        args.seeds,
        out_dir=args.out,
        jobs=args.jobs,
        max_evals=args.max_evals,
        m=args.m,
    )
    print(f"suite {args.suite}: {args.seeds} seed(s) per algorithm")
    header = f"{'algorithm':<10} {'runs':>4} {'median best':>14} {'median gap':>12} {'worst gap':>12}"
    print(header)
    print("-" * len(header))
    for row in aggregate(results):
        print(
            f"{row['algorithm']:<10} {row['runs']:>4} {row['median_best']:>14.6g} "
            f"{row['median_gap']:>12.4g} {row['worst_gap']:>12.4g}"
        )
    return 0


def _cmd_replay(args) -> int:
    log = RunLog.load(args.log)
    report = verify_run_invariants(log)
    print(
        f"replay OK: {report.n_completed} completed, {report.n_failed} failed, "
        f"max in-flight {report.max_in_flight}, {report.n_choices} choices "
        f"({report.n_vc_checked} variance-checked)"
    )
    if args.summary:
        write_summary_csv(log, args.summary)
        print(f"wrote {args.summary}")
    return 0


def _cmd_suggest(args) -> int:
    cfg = load_config(args.config)
    log = RunLog.load(args.state)
    X, y, pending_dict, warm = reconstruct_state(log)
    pend = PendingSet(cfg.space.dim)
    for ticket, x in pending_dict.items():
        pend.add(ticket, np.array(x))
    data = Dataset(X, y)
    seed = np.random.SeedSequence([cfg.seed if args.seed is None else args.seed, 4, data.n])
    choice = _make_choice(cfg.algorithm, cfg.chooser, data, pend, warm, seed)
    x_raw = cfg.space.from_unit(choice.x)
    print(
        json.dumps(
            {
                "x_raw": [float(v) for v in x_raw],
                "x_unit": [float(v) for v in choice.x],
                "provenance": choice.provenance,
                "diagnostics": choice.diagnostics.to_payload(),
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parbo",
        description="Asynchronous parallel Bayesian optimization engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one optimization run from a config file")
    p_run.add_argument("--config", required=True, help="JSON run configuration")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default="runs", help="output directory")
    p_run.set_defaults(fn=_cmd_run)

    p_bench = sub.add_parser("bench", help="head-to-head benchmark suite")
    p_bench.add_argument("--suite", required=True, choices=sorted(SUITES))
    p_bench.add_argument("--algorithms", default="bop,fubar,random",
                         help="comma-separated: bop, fubar, random")
    p_bench.add_argument("--seeds", type=int, default=10)
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--out", default=None, help="directory for per-run logs")
    p_bench.add_argument("--max-evals", type=int, default=None, help="override suite budget")
    p_bench.add_argument("--m", type=int, default=None, help="override suite node count")
    p_bench.set_defaults(fn=_cmd_bench)

    p_replay = sub.add_parser("replay", help="verify a log's invariants and re-derive its summary")
    p_replay.add_argument("--log", required=True)
    p_replay.add_argument("--summary", default=None, help="also write the summary CSV here")
    p_replay.set_defaults(fn=_cmd_replay)

    p_suggest = sub.add_parser("suggest", help="one-shot chooser call for external schedulers")
    p_suggest.add_argument("--state", required=True, help="event log holding the current state")
    p_suggest.add_argument("--config", required=True, help="JSON run configuration")
    p_suggest.add_argument("--seed", type=int, default=None)
    p_suggest.set_defaults(fn=_cmd_suggest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, LogFormatError, InvariantViolation, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
