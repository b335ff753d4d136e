#!/usr/bin/env python3
"""Anatomy of a single point-selection call.

Builds a small observation set plus two pending evaluations, then runs the
hard-filter chooser and the barrier chooser on identical inputs and prints
their full diagnostics: the hyper sample, the variance-control level, and
the candidate counts through each filter stage.
"""

import numpy as np

from parbo import ChooserConfig, Dataset, PendingSet, bop_choose, fubar_choose

rng = np.random.default_rng(3)

X = rng.random((10, 2))
y = -np.sum((X - 0.6) ** 2, axis=1) + 0.02 * rng.standard_normal(10)
data = Dataset(X, y)

pending = PendingSet(2)
pending.add(101, np.array([0.25, 0.7]))
pending.add(102, np.array([0.8, 0.3]))

cfg = ChooserConfig(n_cand=8, t_mcmc=10, rho=0.3)

for name, choose in (("hard-filter (bop)", bop_choose), ("barrier (fubar)", fubar_choose)):
    choice = choose(data, pending, cfg, warm=None, seed=42)
    d = choice.diagnostics
    h = d.hypers
    print(f"--- {name} ---")
    print(f"chose x = ({choice.x[0]:.4f}, {choice.x[1]:.4f})  provenance = {choice.provenance}")
    print(f"hyper sample: sigma={h.sigma:.4g} mu={h.mu_bar:.3f} amp={h.amp:.3f} "
          f"lengths=({h.lengths[0]:.3f}, {h.lengths[1]:.3f})")
    print(f"variance-control level tau = {d.tau:.4g}")
    print(f"filter counts: {d.counts}")
    if d.improvement is not None:
        print(f"winning improvement: {d.improvement:.4g}")
    print()
