"""Lazy draws from the posterior GP and their local maximization.

A :class:`SampledFunction` materializes one random function from a
:class:`~parbo.gp.GpPosterior` point by point: each query draws from the
Gaussian conditional given the base data and everything queried before,
memoizes the pair, and extends a Cholesky factor of the conditional
covariance by one row.  Candidates are produced by running Nelder-Mead on
such a draw (optionally penalized by a variance barrier) from a random
interior start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .gp import GpPosterior, kernel_vector, predict

# Conditional variances at or below this fraction of amp^2 are treated as
# exactly reproducing a previous query: the conditional mean is returned
# and the factor pivot is floored to keep later extensions solvable.
VAR_FLOOR_FRACTION = 1e-12

NM_EVALS_PER_DIM = 50


class SampledFunction:
    """One function drawn lazily from a GP posterior.

    Single-owner mutable state: do not share between concurrent consumers.
    Re-querying an exact previous location returns the stored value.
    """

    def __init__(self, base: GpPosterior, rng, capacity: int = 64):
        self.base = base
        self.rng = rng
        self._dim = base.dim
        self._n = base.n
        cap = max(capacity, 4)
        self._Q = np.zeros((cap, self._dim))       # queried locations
        self._vals = np.zeros(cap)                 # sampled values
        self._resid = np.zeros(cap)                # value - base mean
        self._V = np.zeros((cap, self._n))         # base-factor solves per query
        self._L = np.zeros((cap, cap))             # factor of conditional covariance
        self._w = np.zeros(cap)                    # L^{-1} residuals
        self._k = 0
        self._memo: dict[bytes, int] = {}

    @property
    def n_queried(self) -> int:
        return self._k

    def _grow(self) -> None:
        old_cap = self._Q.shape[0]
        cap = old_cap * 2
        for name in ("_Q", "_V"):
            old = getattr(self, name)
            new = np.zeros((cap,) + old.shape[1:])
            new[:old_cap] = old
            setattr(self, name, new)
        L = np.zeros((cap, cap))
        L[:old_cap, :old_cap] = self._L
        self._L = L
        for name in ("_vals", "_resid", "_w"):
            old = getattr(self, name)
            new = np.zeros(cap)
            new[:old_cap] = old
            setattr(self, name, new)

    def query(self, x) -> float:
        """Sample (or recall) the drawn function's value at ``x``."""
        x = np.ascontiguousarray(x, dtype=float)
        key = x.tobytes()
        idx = self._memo.get(key)
        if idx is not None:
            return float(self._vals[idx])

        base, h = self.base, self.base.hypers
        if self._n:
            kvec = kernel_vector(base.data.X, x, h)
            v = solve_triangular(base.chol, kvec, lower=True, check_finite=False)
            base_mean = h.mu_bar + float(kvec @ base.alpha)
            self_var = h.amp**2 - float(v @ v)
        else:
            v = np.zeros(0)
            base_mean = h.mu_bar
            self_var = h.amp**2

        k = self._k
        if k == 0:
            cond_mean = base_mean
            cond_var = self_var
            u = np.zeros(0)
        else:
            cross = kernel_vector(self._Q[:k], x, h) - self._V[:k] @ v
            u = solve_triangular(self._L[:k, :k], cross, lower=True, check_finite=False)
            cond_var = self_var - float(u @ u)
            cond_mean = base_mean + float(u @ self._w[:k])

        floor = VAR_FLOOR_FRACTION * h.amp**2
        if cond_var <= floor:
            value = cond_mean
            corner = math.sqrt(floor)
        else:
            sd = math.sqrt(cond_var)
            value = cond_mean + sd * float(self.rng.standard_normal())
            corner = sd

        if k == self._Q.shape[0]:
            self._grow()
        self._Q[k] = x
        self._vals[k] = value
        self._resid[k] = value - base_mean
        self._V[k, :] = v
        self._L[k, :k] = u
        self._L[k, k] = corner
        self._w[k] = (self._resid[k] - float(u @ self._w[:k])) / corner
        self._k = k + 1
        self._memo[key] = k
        return float(value)


def barrier(s: float, threshold: float, z: float) -> float:
    """Soft variance barrier ``(threshold / s)^z``; infinite at ``s == 0``."""
    if s == 0.0:
        return math.inf
    return (threshold / s) ** z


def nelder_mead_max(objective, x0, x_atol: float, max_evals: int) -> tuple[np.ndarray, float]:
    """Maximize ``objective`` over the unit cube with the simplex method.

    Every candidate vertex is clipped to ``[0, 1]^D`` before evaluation.
    Stops when the simplex diameter (max pairwise max-norm) drops below
    ``x_atol`` or the evaluation budget runs out, returning the best vertex
    seen.  Budget exhaustion is a normal return.
    """
    x0 = np.clip(np.asarray(x0, dtype=float), 0.0, 1.0)
    dim = x0.size
    evals = 0

    def f(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        return float(objective(x))

    simplex = [x0.copy()]
    for k in range(dim):
        v = x0.copy()
        v[k] += 0.05
        if v[k] > 1.0:
            v[k] = x0[k] - 0.05
        simplex.append(np.clip(v, 0.0, 1.0))
    values = [f(v) for v in simplex]

    def diameter() -> float:
        pts = np.array(simplex)
        return float(np.max(np.abs(pts[:, None, :] - pts[None, :, :])))

    while evals < max_evals and diameter() >= x_atol:
        order = sorted(range(dim + 1), key=lambda i: -values[i])
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        worst = simplex[-1]
        centroid = np.mean(simplex[:-1], axis=0)

        xr = np.clip(centroid + (centroid - worst), 0.0, 1.0)
        fr = f(xr)
        if fr > values[0]:
            if evals < max_evals:
                xe = np.clip(centroid + 2.0 * (centroid - worst), 0.0, 1.0)
                fe = f(xe)
                if fe > fr:
                    simplex[-1], values[-1] = xe, fe
                    continue
            simplex[-1], values[-1] = xr, fr
        elif fr > values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            xc = np.clip(centroid + 0.5 * (worst - centroid), 0.0, 1.0)
            if evals >= max_evals:
                break
            fc = f(xc)
            if fc > values[-1]:
                simplex[-1], values[-1] = xc, fc
            else:
                # shrink toward the best vertex
                for i in range(1, dim + 1):
                    if evals >= max_evals:
                        break
                    simplex[i] = np.clip(
                        simplex[0] + 0.5 * (simplex[i] - simplex[0]), 0.0, 1.0
                    )
                    values[i] = f(simplex[i])

    best = int(np.argmax(values))
    return simplex[best].copy(), values[best]


@dataclass(frozen=True)
class Candidate:
    """A locally maximized draw: location, sampled value, predictive std-dev."""

    x: np.ndarray
    fhat: float
    sd: float


def variance_threshold(cfg, sigma: float) -> float:
    """Variance-control level: the larger of the relative and absolute floors."""
    return max(cfg.rho * sigma, cfg.sem_min)


def sample_candidate(base: GpPosterior, cfg, rng, mode: str = "plain") -> Candidate:
    """Draw a fresh posterior function and locally maximize it.

    ``mode == "plain"`` maximizes the draw itself; ``mode == "barrier"``
    maximizes the draw minus ``barrier(sd(x), tau, z)`` so low-variance
    regions repel the search.  ``cfg`` supplies ``rho``, ``sem_min``, ``z``
    and ``x_atol``.  One sampled function per candidate.
    """
    dim = base.dim
    sf = SampledFunction(base, rng)
    if mode == "plain":
        objective = sf.query
    elif mode == "barrier":
        tau = variance_threshold(cfg, base.hypers.sigma)

        def objective(x):
            sd = math.sqrt(predict(base, x)[1])
            return sf.query(x) - barrier(sd, tau, cfg.z)

    else:
        raise ValueError(f"unknown candidate mode {mode!r}")

    x0 = np.clip(rng.random(dim), 1e-9, 1.0 - 1e-9)
    x, _ = nelder_mead_max(objective, x0, cfg.x_atol, max_evals=NM_EVALS_PER_DIM * dim)
    fhat = sf.query(x)  # memoized: exact stored draw at the returned vertex
    sd = math.sqrt(predict(base, x)[1])
    return Candidate(x=x, fhat=fhat, sd=sd)
