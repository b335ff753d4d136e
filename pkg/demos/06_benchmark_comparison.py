#!/usr/bin/env python3
"""Desk-scale head-to-head: both choosers against pure random search.

A trimmed version of the `parbo bench` command (smaller budget, fewer
seeds) so it finishes in about a minute.  For the full comparison run:

    parbo bench --suite branin --algorithms bop,fubar,random --seeds 10 --jobs 2
"""

from parbo.bench import aggregate, run_bench
from parbo.objectives import get_objective

results = run_bench("branin", ["bop", "fubar", "random"], seeds=3, max_evals=32, jobs=2)

opt = get_objective("branin").best_value
print(f"branin, 32 evaluations, 3 seeds per algorithm (optimum {opt:.5f}):\n")
print(f"{'algorithm':<10} {'median best':>12} {'median gap':>11} {'worst gap':>10}")
for row in aggregate(results):
    print(
        f"{row['algorithm']:<10} {row['median_best']:>12.5f} "
        f"{row['median_gap']:>11.4f} {row['worst_gap']:>10.4f}"
    )
