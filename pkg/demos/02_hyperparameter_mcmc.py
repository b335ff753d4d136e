#!/usr/bin/env python3
"""Slice-sampling the GP hyper-parameters on synthetic data.

Draws a function from a GP with known length scale, then runs several
independent MCMC chains and prints posterior quantiles of each
hyper-parameter.  The known length scale should sit inside the spread.
"""

import numpy as np

from parbo import Dataset, Hypers, PriorConfig, PriorScales, sample_hypers
from parbo.gp import gram
from parbo.hypers import prior_median_hypers

rng = np.random.default_rng(1)

TRUE_LENGTH = 0.2
TRUE_SIGMA = 0.05

X = rng.random((40, 1))
truth = Hypers(TRUE_SIGMA, 0.0, 1.0, np.array([TRUE_LENGTH]))
K = gram(X, truth, nugget=1e-10)
f = np.linalg.cholesky(K) @ rng.standard_normal(40)
y = f + TRUE_SIGMA * rng.standard_normal(40)
data = Dataset(X, y)

prior_cfg = PriorConfig.for_data(data.y, PriorScales())
init = prior_median_hypers(prior_cfg, 1)

draws = [sample_hypers(data, prior_cfg, init, t_mcmc=30, seed=s) for s in range(16)]

print(f"true sigma = {TRUE_SIGMA}, true length = {TRUE_LENGTH}\n")
print(f"{'parameter':<10} {'q25':>8} {'median':>8} {'q75':>8}")
for name, values in [
    ("sigma", [h.sigma for h in draws]),
    ("amp", [h.amp for h in draws]),
    ("length", [h.lengths[0] for h in draws]),
    ("mu_bar", [h.mu_bar for h in draws]),
]:
    q25, q50, q75 = np.percentile(values, [25, 50, 75])
    print(f"{name:<10} {q25:8.3f} {q50:8.3f} {q75:8.3f}")
