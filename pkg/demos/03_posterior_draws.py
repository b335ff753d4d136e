#!/usr/bin/env python3
"""Lazy posterior draws and their local maximization.

Materializes a few random functions from the same posterior point by point
(each is internally consistent: re-querying a location returns the stored
value) and maximizes each with the simplex search.  Different draws peak in
different places; that spread is what drives parallel exploration.
"""

import numpy as np

from parbo import Dataset, Hypers, SampledFunction, fit, nelder_mead_max, predict

rng = np.random.default_rng(2)

X = np.array([[0.15, 0.4], [0.5, 0.85], [0.75, 0.2], [0.9, 0.65]])
y = np.array([0.2, 0.9, 0.4, 0.1])
hypers = Hypers(sigma=0.05, mu_bar=float(y.mean()), amp=0.5, lengths=np.array([0.3, 0.3]))
base = fit(Dataset(X, y), hypers)

print("maximizing five independent posterior draws:")
print(f"{'draw':>4} {'argmax':>18} {'draw value':>11} {'posterior mean':>15} {'sd':>7}")
for i in range(5):
    sf = SampledFunction(base, np.random.default_rng(100 + i))
    x0 = rng.uniform(0.05, 0.95, 2)
    x, value = nelder_mead_max(sf.query, x0, x_atol=1e-4, max_evals=200)
    mean, var = predict(base, x)
    print(
        f"{i:>4} ({x[0]:7.3f}, {x[1]:7.3f}) {value:11.3f} {mean:15.3f} {np.sqrt(var):7.3f}"
        f"   [{sf.n_queried} points queried]"
    )

sf = SampledFunction(base, np.random.default_rng(7))
x_probe = np.array([0.33, 0.66])
print("\nmemoization: querying the same point twice returns the stored draw:")
print(f"  first  query: {sf.query(x_probe):.12f}")
print(f"  second query: {sf.query(x_probe):.12f}")
