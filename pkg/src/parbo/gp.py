"""Exact Gaussian-process regression on the unit cube.

Matérn-5/2 kernel with one length scale per axis, batch and incremental
Cholesky factorization, latent-function predictive mean/variance, and the
log marginal likelihood.  Observation noise enters the factorized matrix
(``K + sigma^2 I``) but is never added to predictive variances here; callers
that need noisy draws add ``sigma^2`` themselves.

A small diagonal jitter proportional to the kernel amplitude is always
included; on factorization failure it escalates by decades up to a hard
ceiling before a :class:`NumericalError` is raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist

SQRT5 = math.sqrt(5.0)

# Jitter ladder, as fractions of amp^2.
JITTER_START_FRACTION = 1e-10
JITTER_MAX_FRACTION = 1e-4


class NumericalError(RuntimeError):
    """Linear algebra failed beyond the configured jitter escalation."""


class DegeneracyError(RuntimeError):
    """A Cholesky extension hit a non-positive pivot."""


@dataclass(frozen=True)
class Hypers:
    """Model hyper-parameters: noise, constant mean, amplitude, length scales.

    ``sigma``, ``mu_bar`` and ``amp`` are in the units of the observed
    values; ``lengths`` are in unit-cube units, one per axis.
    """

    sigma: float
    mu_bar: float
    amp: float
    lengths: np.ndarray

    def __post_init__(self):
        lengths = np.atleast_1d(np.asarray(self.lengths, dtype=float))
        if not (self.sigma > 0.0 and self.amp > 0.0 and np.all(lengths > 0.0)):
            raise ValueError("sigma, amp and all length scales must be positive")
        object.__setattr__(self, "lengths", lengths)

    @property
    def dim(self) -> int:
        return int(self.lengths.size)


@dataclass(frozen=True)
class Dataset:
    """Observation locations in the unit cube paired with their values."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValueError("X must be (n, D) and y must be (n,) with matching n")
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise ValueError("locations must lie inside the unit cube")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def empty(cls, dim: int) -> "Dataset":
        return cls(np.empty((0, dim)), np.empty(0))

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def dim(self) -> int:
        return int(self.X.shape[1])

    def extended(self, X_new: np.ndarray, y_new: np.ndarray) -> "Dataset":
        return Dataset(np.vstack([self.X, X_new]), np.concatenate([self.y, y_new]))


def matern52(xi, xj, hypers: Hypers) -> float:
    """Kernel value between two points: amp^2 (1 + sqrt5 r + 5/3 r^2) e^{-sqrt5 r}."""
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    d = (xi - xj) / hypers.lengths
    r = math.sqrt(float(np.dot(d, d)))
    return hypers.amp**2 * (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * math.exp(-SQRT5 * r)


def _m52_from_r(r: np.ndarray, amp: float) -> np.ndarray:
    return amp**2 * (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * np.exp(-SQRT5 * r)


def kernel_matrix(A: np.ndarray, B: np.ndarray, hypers: Hypers) -> np.ndarray:
    """Cross-covariance matrix between two point sets, shape (len(A), len(B))."""
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((A.shape[0], B.shape[0]))
    r = cdist(A / hypers.lengths, B / hypers.lengths)
    return _m52_from_r(r, hypers.amp)


def kernel_vector(X: np.ndarray, x: np.ndarray, hypers: Hypers) -> np.ndarray:
    """Covariances between each row of ``X`` and a single point ``x``."""
    if X.shape[0] == 0:
        return np.zeros(0)
    d = (X - x) / hypers.lengths
    r = np.sqrt(np.einsum("ij,ij->i", d, d))
    return _m52_from_r(r, hypers.amp)


def gram(X: np.ndarray, hypers: Hypers, nugget: float) -> np.ndarray:
    """Kernel matrix of a point set with ``nugget`` added to the diagonal.

    Exactly symmetric: entries (i, j) and (j, i) follow the same
    floating-point path.
    """
    K = kernel_matrix(X, X, hypers)
    if nugget:
        K[np.diag_indices_from(K)] += nugget
    return K


def _chol_with_jitter(M: np.ndarray, scale: float) -> tuple[np.ndarray, float]:
    """Factorize ``M + jitter I``, escalating jitter by decades on failure.

    ``scale`` sets the jitter ladder (fractions of amp^2).  Raises
    :class:`NumericalError` listing every attempted level once the ceiling
    is passed.
    """
    jitter = JITTER_START_FRACTION * scale
    attempted = []
    while jitter <= JITTER_MAX_FRACTION * scale * (1.0 + 1e-12):
        attempted.append(jitter)
        try:
            L = np.linalg.cholesky(M + jitter * np.eye(M.shape[0]))
            return L, jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericalError(
        f"Cholesky factorization failed; attempted jitter levels {attempted}"
    )


@dataclass(frozen=True)
class GpPosterior:
    """Immutable posterior snapshot: data, hypers, factor, and solved weights.

    ``chol`` is the lower Cholesky factor of ``K + sigma^2 I + jitter I``;
    ``alpha`` solves that matrix against the centered observations.
    """

    data: Dataset
    hypers: Hypers
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float = 0.0

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def dim(self) -> int:
        return self.hypers.dim


def fit(data: Dataset, hypers: Hypers) -> GpPosterior:
    """Factorize the observation covariance and precompute solved weights.

    An empty dataset yields the prior: ``predict`` returns
    ``(mu_bar, amp^2)`` everywhere.
    """
    n = data.n
    if n == 0:
        return GpPosterior(data, hypers, np.zeros((0, 0)), np.zeros(0), 0.0)
    K = gram(data.X, hypers, hypers.sigma**2)
    L, jitter = _chol_with_jitter(K, hypers.amp**2)
    resid = data.y - hypers.mu_bar
    z = solve_triangular(L, resid, lower=True, check_finite=False)
    alpha = solve_triangular(L.T, z, lower=False, check_finite=False)
    return GpPosterior(data, hypers, L, alpha, jitter)


def predict(post: GpPosterior, x) -> tuple[float, float]:
    """Latent-function predictive mean and variance at one point.

    Variance is clamped to ``[0, amp^2]``; observation noise is excluded.
    """
    h = post.hypers
    if post.n == 0:
        return h.mu_bar, h.amp**2
    x = np.asarray(x, dtype=float)
    k = kernel_vector(post.data.X, x, h)
    v = solve_triangular(post.chol, k, lower=True, check_finite=False)
    mean = h.mu_bar + float(k @ post.alpha)
    var = h.amp**2 - float(v @ v)
    return mean, min(max(var, 0.0), h.amp**2)


def predict_batch(post: GpPosterior, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`predict` over the rows of ``Xq``."""
    h = post.hypers
    Xq = np.asarray(Xq, dtype=float)
    if post.n == 0:
        return np.full(Xq.shape[0], h.mu_bar), np.full(Xq.shape[0], h.amp**2)
    Kc = kernel_matrix(post.data.X, Xq, h)
    V = solve_triangular(post.chol, Kc, lower=True, check_finite=False)
    means = h.mu_bar + Kc.T @ post.alpha
    vars_ = h.amp**2 - np.einsum("ij,ij->j", V, V)
    return means, np.clip(vars_, 0.0, h.amp**2)


def posterior_mean_cov(post: GpPosterior, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Joint latent posterior over the rows of ``Xq``: mean vector and covariance."""
    h = post.hypers
    Xq = np.asarray(Xq, dtype=float)
    prior_cov = kernel_matrix(Xq, Xq, h)
    if post.n == 0:
        return np.full(Xq.shape[0], h.mu_bar), prior_cov
    Kc = kernel_matrix(post.data.X, Xq, h)
    V = solve_triangular(post.chol, Kc, lower=True, check_finite=False)
    means = h.mu_bar + Kc.T @ post.alpha
    cov = prior_cov - V.T @ V
    return means, 0.5 * (cov + cov.T)


def log_marginal(data: Dataset, hypers: Hypers) -> float:
    """Log marginal likelihood of the observations under the GP model.

    Computed through the Cholesky factor of ``K + sigma^2 I`` (plus the
    standing jitter); requires at least one observation.
    """
    if data.n == 0:
        raise ValueError("log marginal likelihood needs at least one observation")
    post = fit(data, hypers)
    resid = data.y - hypers.mu_bar
    z = solve_triangular(post.chol, resid, lower=True, check_finite=False)
    logdet_half = float(np.sum(np.log(np.diag(post.chol))))
    return -0.5 * float(z @ z) - logdet_half - 0.5 * data.n * math.log(2.0 * math.pi)


def chol_append(chol: np.ndarray, cross: np.ndarray, self_var: float) -> np.ndarray:
    """Extend a lower Cholesky factor by one row/column.

    ``cross`` holds covariances between the new point and the existing ones,
    ``self_var`` its own variance.  Raises :class:`DegeneracyError` when the
    Schur complement is not positive.
    """
    k = chol.shape[0]
    cross = np.asarray(cross, dtype=float)
    if cross.shape != (k,):
        raise ValueError(f"cross must have length {k}")
    if k == 0:
        if self_var <= 0.0:
            raise DegeneracyError(f"non-positive self variance {self_var!r}")
        return np.array([[math.sqrt(self_var)]])
    u = solve_triangular(chol, cross, lower=True, check_finite=False)
    corner_sq = self_var - float(u @ u)
    if corner_sq <= 0.0:
        raise DegeneracyError(f"non-positive Cholesky pivot {corner_sq!r}")
    out = np.zeros((k + 1, k + 1))
    out[:k, :k] = chol
    out[k, :k] = u
    out[k, k] = math.sqrt(corner_sq)
    return out
