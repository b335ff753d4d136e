"""Benchmark harness: named suites run head-to-head across algorithms.

Each suite fixes an objective on its canonical box, a node count, and an
evaluation budget; the harness runs every requested algorithm across seeds,
saves per-run logs and summaries, and aggregates final bests and gaps to
the known optimum.  Runs are independent, so they can be farmed out to a
process pool without affecting results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chooser import ChooserConfig
from .config import ExecutorConfig, InitConfig, ObjectiveConfig, RunConfig
from .driver import run
from .objectives import get_objective
from .runlog import write_summary_csv
from .space import ParameterSpace

SUITES = {
    "branin": {"objective": "branin", "dim": 2, "m": 8, "max_evals": 64},
    "hartmann6": {"objective": "hartmann6", "dim": 6, "m": 8, "max_evals": 128},
    "sphere4": {"objective": "sphere", "dim": 4, "m": 4, "max_evals": 64},
}


@dataclass
class BenchResult:
    suite: str
    algorithm: str
    seed: int
    best: float
    gap: float
    log_path: str


def suite_config(suite: str, algorithm: str, seed: int, max_evals: int | None = None,
                 m: int | None = None, chooser: ChooserConfig | None = None) -> RunConfig:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r} (available: {sorted(SUITES)})")
    spec = SUITES[suite]
    obj = get_objective(spec["objective"], spec["dim"])
    return RunConfig(
        space=ParameterSpace(obj.lower, obj.upper),
        m=m if m is not None else spec["m"],
        max_evals=max_evals if max_evals is not None else spec["max_evals"],
        max_time=None,
        algorithm=algorithm,
        seed=seed,
        chooser=chooser if chooser is not None else ChooserConfig(),
        executor=ExecutorConfig(),
        objective=ObjectiveConfig(id=spec["objective"]),
        init=InitConfig(),
    )


def _bench_one(args) -> BenchResult:
    suite, algorithm, seed, out_dir, max_evals, m = args
    cfg = suite_config(suite, algorithm, seed, max_evals=max_evals, m=m)
    log = run(cfg)
    best = float(log.best_trace()[-1])
    obj = get_objective(cfg.objective.id, cfg.space.dim)
    path = ""
    if out_dir is not None:
        base = Path(out_dir)
        base.mkdir(parents=True, exist_ok=True)
        path = str(base / f"{suite}_{algorithm}_seed{seed}.jsonl")
        log.save(path)
        write_summary_csv(log, str(base / f"{suite}_{algorithm}_seed{seed}.csv"))
    return BenchResult(suite, algorithm, seed, best, obj.best_value - best, path)


def run_bench(suite: str, algorithms, seeds: int, out_dir=None, jobs: int = 1,
              max_evals: int | None = None, m: int | None = None) -> list[BenchResult]:
    """Run every algorithm for ``seeds`` seeds; returns one result per run."""
    tasks = [
        (suite, algo, seed, out_dir, max_evals, m)
        for algo in algorithms
        for seed in range(seeds)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_one, tasks))
    else:
        results = [_bench_one(t) for t in tasks]
    return results


def aggregate(results: list[BenchResult]) -> list[dict]:
    """Per-algorithm medians of final best and gap, sorted by gap."""
    rows = []
    for algo in sorted({r.algorithm for r in results}):
        sub = [r for r in results if r.algorithm == algo]
        rows.append(
            {
                "algorithm": algo,
                "runs": len(sub),
                "median_best": float(np.median([r.best for r in sub])),
                "median_gap": float(np.median([r.gap for r in sub])),
                "worst_gap": float(np.max([r.gap for r in sub])),
            }
        )
    rows.sort(key=lambda r: r["median_gap"])
    return rows
