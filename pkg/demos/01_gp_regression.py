#!/usr/bin/env python3
"""Gaussian-process regression on a 1-d toy function.

Fits the exact GP to a handful of noisy observations and prints the
posterior mean and standard deviation along the axis, so you can see the
interpolation behavior and the growth of uncertainty away from the data.
"""

import numpy as np

from parbo import Dataset, Hypers, fit, log_marginal, predict

rng = np.random.default_rng(0)

truth = lambda x: np.sin(6.0 * x) * (1.0 - x)
X = rng.random((8, 1))
y = truth(X[:, 0]) + 0.05 * rng.standard_normal(8)
data = Dataset(X, y)

hypers = Hypers(sigma=0.05, mu_bar=float(y.mean()), amp=0.6, lengths=np.array([0.15]))
post = fit(data, hypers)

print(f"log marginal likelihood: {log_marginal(data, hypers):.3f}")
print(f"{'x':>6} {'truth':>8} {'mean':>8} {'sd':>7}")
for x in np.linspace(0.0, 1.0, 21):
    mean, var = predict(post, np.array([x]))
    marker = " *" if np.any(np.abs(X[:, 0] - x) < 0.025) else ""
    print(f"{x:6.2f} {truth(x):8.3f} {mean:8.3f} {np.sqrt(var):7.3f}{marker}")
print("(* = an observation nearby; note the sd dip)")
