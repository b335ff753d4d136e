"""Point-selection algorithms for the asynchronous optimizer.

Two choosers are provided.  ``bop`` alternates between maximizing the
improvement of single posterior draws and random poll steps around the
incumbent, with a hard filter that rejects candidates whose predictive
standard deviation falls below the variance-control level ``tau``.
``fubar`` replaces the hard filter with a soft power-law barrier subtracted
from the draw, which makes the filter itself redundant and so drops it.

Every chooser call is a pure function of ``(data, pending, cfg, warm,
seed)``: it samples one set of hyper-parameters by MCMC, imputes pending
evaluations with posterior fantasies, generates candidates from fresh
posterior draws, filters, and ranks.  If no candidate survives it falls
back to a poll step, then to a uniform random point, so a point is always
returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gp import (
    Dataset,
    GpPosterior,
    Hypers,
    _chol_with_jitter,
    fit,
    posterior_mean_cov,
    predict,
    predict_batch,
)
from .hypers import PriorConfig, PriorScales, prior_median_hypers, sample_hypers
from .space import is_edge_point
from .thompson import Candidate, barrier, sample_candidate, variance_threshold


@dataclass
class PendingSet:
    """Locations submitted for evaluation but not yet finished, by ticket."""

    dim: int
    entries: dict[int, np.ndarray] = field(default_factory=dict)

    def add(self, ticket: int, x) -> None:
        if ticket in self.entries:
            raise ValueError(f"duplicate pending ticket {ticket}")
        self.entries[ticket] = np.asarray(x, dtype=float)

    def remove(self, ticket: int) -> np.ndarray:
        return self.entries.pop(ticket)

    def locations(self) -> np.ndarray:
        if not self.entries:
            return np.empty((0, self.dim))
        return np.array(list(self.entries.values()))

    def copy(self) -> "PendingSet":
        return PendingSet(self.dim, dict(self.entries))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ChooserConfig:
    """Every tunable of the selection algorithms, with artifact defaults."""

    n_cand: int = 10
    n_poll: int = 10
    l_poll: float = 0.5
    rho: float = 0.1
    sem_min: float = 1e-3
    z: float = 10.0
    x_atol: float = 1e-3
    t_mcmc: int = 10
    improvement_epsilon: float = 0.0
    exclude_edge_points: bool = True
    prior: PriorScales = field(default_factory=PriorScales)

    def __post_init__(self):
        ok = (
            self.n_cand >= 1
            and self.n_poll >= 1
            and self.l_poll > 0
            and self.rho >= 0
            and self.sem_min >= 0
            and self.z > 0
            and self.x_atol > 0
            and self.t_mcmc >= 1
            and self.improvement_epsilon >= 0
        )
        if not ok:
            raise ValueError("invalid chooser configuration")

    @property
    def edge_tol(self) -> float:
        # Points the local optimizer cannot distinguish from the boundary
        # count as edge points.
        return self.x_atol


@dataclass(frozen=True)
class ChoiceDiagnostics:
    """What the chooser saw: hyper sample, threshold, filter counts, score."""

    hypers: Hypers | None
    tau: float | None
    counts: dict | None
    improvement: float | None
    n_obs: int
    n_pending: int

    def to_payload(self) -> dict:
        h = None
        if self.hypers is not None:
            h = {
                "sigma": self.hypers.sigma,
                "mu_bar": self.hypers.mu_bar,
                "amp": self.hypers.amp,
                "lengths": [float(t) for t in self.hypers.lengths],
            }
        return {
            "hypers": h,
            "tau": self.tau,
            "counts": self.counts,
            "improvement": self.improvement,
            "n_obs": self.n_obs,
            "n_pending": self.n_pending,
        }


@dataclass(frozen=True)
class Choice:
    """A chosen unit-cube point with its provenance and diagnostics."""

    x: np.ndarray
    provenance: str  # bayes | poll | default
    diagnostics: ChoiceDiagnostics


def fantasize(data: Dataset, pending: PendingSet, hypers: Hypers, rng) -> Dataset:
    """Impute pending evaluations with a joint draw from the posterior.

    Values are drawn jointly at all pending locations from the posterior
    given ``data`` under the supplied hyper sample, plus observation noise.
    Hyper-parameters are not re-sampled against the fantasies.  An empty
    pending set returns ``data`` unchanged.
    """
    if len(pending) == 0:
        return data
    post = fit(data, hypers)
    Xp = pending.locations()
    means, cov = posterior_mean_cov(post, Xp)
    L, _ = _chol_with_jitter(cov, hypers.amp**2)
    f_draw = means + L @ rng.standard_normal(len(pending))
    y_fant = f_draw + hypers.sigma * rng.standard_normal(len(pending))
    return data.extended(Xp, y_fant)


def incumbent(data_fant: Dataset, posterior_fant: GpPosterior) -> float:
    """Best posterior mean over all observed and fantasized locations."""
    if data_fant.n == 0:
        raise ValueError("incumbent needs a nonempty dataset")
    means, _ = predict_batch(posterior_fant, data_fant.X)
    return float(np.max(means))


def improvement(fhat: float, inc: float) -> float:
    """Hinge of a sampled value above the incumbent, safe against inf-inf."""
    diff = fhat - inc
    if math.isnan(diff):
        return 0.0
    return max(diff, 0.0)


def barrier_incumbent(data_fant: Dataset, posterior_fant: GpPosterior, tau: float, z: float) -> float:
    """Best barrier-penalized posterior mean over the dataset locations."""
    means, vars_ = predict_batch(posterior_fant, data_fant.X)
    penalties = np.array([barrier(s, tau, z) for s in np.sqrt(vars_)])
    return float(np.max(means - penalties))


def expected_improvement(post: GpPosterior, x, inc: float) -> float:
    """Closed-form Gaussian expected improvement above ``inc`` at ``x``."""
    mean, var = predict(post, x)
    s = math.sqrt(var)
    if s == 0.0:
        return max(mean - inc, 0.0)
    u = (mean - inc) / s
    pdf = math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    cdf = 0.5 * (1.0 + math.erf(u / math.sqrt(2.0)))
    return s * (u * cdf + pdf)


def _collides(x: np.ndarray, X: np.ndarray) -> bool:
    return bool(X.size) and bool(np.any(np.all(X == x, axis=1)))


def _poll_candidates(x_best: np.ndarray, lengths: np.ndarray, cfg: ChooserConfig, rng) -> np.ndarray:
    """Random poll points around the incumbent, clipped to the cube.

    Per-axis displacement is a centered normal with std-dev
    ``l_poll * lengths[k]``.
    """
    offsets = rng.standard_normal((cfg.n_poll, x_best.size)) * (cfg.l_poll * lengths)
    return np.clip(x_best + offsets, 0.0, 1.0)


def _poll_step(data_fant: Dataset, posterior_fant: GpPosterior, cfg: ChooserConfig, rng,
               counts: dict) -> np.ndarray | None:
    means, _ = predict_batch(posterior_fant, data_fant.X)
    x_best = data_fant.X[int(np.argmax(means))]
    cands = _poll_candidates(x_best, posterior_fant.hypers.lengths, cfg, rng)
    counts["poll_generated"] = len(cands)
    tau = variance_threshold(cfg, posterior_fant.hypers.sigma)
    _, vars_ = predict_batch(posterior_fant, cands)
    sds = np.sqrt(vars_)
    keep = sds > tau
    counts["poll_after_variance"] = int(np.sum(keep))
    if cfg.exclude_edge_points:
        keep &= ~np.array([is_edge_point(c, cfg.edge_tol) for c in cands])
    counts["poll_after_edge"] = int(np.sum(keep))
    if not np.any(keep):
        return None
    idx = np.flatnonzero(keep)
    return cands[idx[np.argmax(sds[idx])]]


def poll_step(data_fant: Dataset, posterior_fant: GpPosterior, cfg: ChooserConfig, rng):
    """Random exploration around the incumbent; the max-variance survivor.

    Returns ``None`` when every poll candidate is filtered away.
    """
    return _poll_step(data_fant, posterior_fant, cfg, rng, counts={})


def default_step(dim: int, cfg: ChooserConfig, rng) -> np.ndarray:
    """Uniform random point, kept off the edges when exclusion is on."""
    lo = cfg.edge_tol if cfg.exclude_edge_points else 0.0
    return rng.uniform(lo, 1.0 - lo, dim)


def _choose(data: Dataset, pending: PendingSet, cfg: ChooserConfig, warm: Hypers | None,
            seed, algorithm: str) -> Choice:
    if data.n == 0:
        raise ValueError("chooser needs at least one completed observation")
    rng = np.random.default_rng(seed)
    dim = data.dim

    prior_cfg = PriorConfig.for_data(data.y, cfg.prior)
    init = warm if warm is not None else prior_median_hypers(prior_cfg, dim)
    hypers = sample_hypers(data, prior_cfg, init, cfg.t_mcmc, rng)
    tau = variance_threshold(cfg, hypers.sigma)

    data_fant = fantasize(data, pending, hypers, rng)
    posterior_fant = fit(data_fant, hypers)

    mode = "plain" if algorithm == "bop" else "barrier"
    cands = [sample_candidate(posterior_fant, cfg, rng, mode) for _ in range(cfg.n_cand)]

    counts = {"generated": len(cands)}
    cands = [c for c in cands if not _collides(c.x, data_fant.X)]
    counts["after_collision"] = len(cands)
    if algorithm == "bop":
        cands = [c for c in cands if c.sd > tau]
        counts["after_variance"] = len(cands)
    if cfg.exclude_edge_points:
        cands = [c for c in cands if not is_edge_point(c.x, cfg.edge_tol)]
    counts["after_edge"] = len(cands)

    scored: list[tuple[float, Candidate]] = []
    if cands:
        if algorithm == "bop":
            inc = incumbent(data_fant, posterior_fant)
            scored = [(improvement(c.fhat, inc), c) for c in cands]
        else:
            inc = barrier_incumbent(data_fant, posterior_fant, tau, cfg.z)
            scored = [
                (improvement(c.fhat - barrier(c.sd, tau, cfg.z), inc), c) for c in cands
            ]
        scored = [(s, c) for s, c in scored if s > cfg.improvement_epsilon]
    counts["after_improvement"] = len(scored)

    def diag(score=None):
        return ChoiceDiagnostics(
            hypers=hypers,
            tau=tau,
            counts=counts,
            improvement=score,
            n_obs=data.n,
            n_pending=len(pending),
        )

    if scored:
        best_score, best = max(scored, key=lambda sc: sc[0])
        return Choice(best.x, "bayes", diag(best_score))

    x_poll = _poll_step(data_fant, posterior_fant, cfg, rng, counts)
    if x_poll is not None:
        return Choice(x_poll, "poll", diag())

    return Choice(default_step(dim, cfg, rng), "default", diag())


def bop_choose(data: Dataset, pending: PendingSet, cfg: ChooserConfig,
               warm: Hypers | None, seed) -> Choice:
    """Sample-improvement chooser with the hard variance filter."""
    return _choose(data, pending, cfg, warm, seed, "bop")


def fubar_choose(data: Dataset, pending: PendingSet, cfg: ChooserConfig,
                 warm: Hypers | None, seed) -> Choice:
    """Barrier-penalized chooser; the hard variance filter is dropped."""
    return _choose(data, pending, cfg, warm, seed, "fubar")
