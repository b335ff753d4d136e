"""Built-in benchmark objectives, all posed as maximization problems.

Classic minimization test functions are negated so the optimizer's
"higher is better" convention holds everywhere.  ``best_value`` and
``best_x`` record the known optimum of the maximization form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Objective:
    name: str
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    best_value: float
    best_x: np.ndarray
    _fn: callable

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self._fn(x[None, :])[0])

    def batch(self, X) -> np.ndarray:
        return self._fn(np.asarray(X, dtype=float))


def _sphere(X):
    return -np.sum(X**2, axis=1)


def _branin(X):
    x1, x2 = X[:, 0], X[:, 1]
    a = 1.0
    b = 5.1 / (4.0 * np.pi**2)
    c = 5.0 / np.pi
    r = 6.0
    s = 10.0
    t = 1.0 / (8.0 * np.pi)
    val = a * (x2 - b * x1**2 + c * x1 - r) ** 2 + s * (1.0 - t) * np.cos(x1) + s
    return -val


_HARTMANN6_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_HARTMANN6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_HARTMANN6_P = 1e-4 * np.array(
    [
        [1312.0, 1696.0, 5569.0, 124.0, 8283.0, 5886.0],
        [2329.0, 4135.0, 8307.0, 3736.0, 1004.0, 9991.0],
        [2348.0, 1451.0, 3522.0, 2883.0, 3047.0, 6650.0],
        [4047.0, 8828.0, 8732.0, 5743.0, 1091.0, 381.0],
    ]
)


def _hartmann6(X):
    inner = np.einsum("kj,nkj->nk", _HARTMANN6_A, (X[:, None, :] - _HARTMANN6_P) ** 2)
    return np.exp(-inner) @ _HARTMANN6_ALPHA


def get_objective(name: str, dim: int | None = None) -> Objective:
    """Look up a built-in objective; unknown names raise ``ValueError``."""
    if name == "sphere":
        d = dim if dim is not None else 2
        return Objective(
            name="sphere",
            dim=d,
            lower=np.full(d, -5.12),
            upper=np.full(d, 5.12),
            best_value=0.0,
            best_x=np.zeros(d),
            _fn=_sphere,
        )
    if name == "branin":
        if dim not in (None, 2):
            raise ValueError("branin is 2-dimensional")
        return Objective(
            name="branin",
            dim=2,
            lower=np.array([-5.0, 0.0]),
            upper=np.array([10.0, 15.0]),
            best_value=-0.39788735772973816,
            best_x=np.array([np.pi, 2.275]),
            _fn=_branin,
        )
    if name == "hartmann6":
        if dim not in (None, 6):
            raise ValueError("hartmann6 is 6-dimensional")
        return Objective(
            name="hartmann6",
            dim=6,
            lower=np.zeros(6),
            upper=np.ones(6),
            best_value=3.322368011391339,
            best_x=np.array([0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]),
            _fn=_hartmann6,
        )
    raise ValueError(f"unknown objective {name!r}")
