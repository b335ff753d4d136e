"""Prior densities over the GP hyper-parameters and slice-sampling MCMC.

Priors
------
* noise variance ``sigma^2``:  p(v) proportional to ``log(1 + (v_noise/v)^2)``
* amplitude ``amp^2``:         log-normal, ``p(a) ~ (1/a) exp(-0.5 (log a / A2)^2)``
* each length scale ``theta``: inverse gamma with shape ``alpha_length`` and
  scale ``lambda_length``
* constant mean ``mu_bar``:    flat between the smallest and largest observed
  value, zero mass outside

All densities are over the squared quantities exactly as stated above (not
over their logs) and are used unnormalized.

Sampling parameterization
-------------------------
The chain moves in the vector ``w = [log sigma^2, mu_bar, log amp^2,
log theta_1, ..., log theta_D]``.  Targets built here include the log-space
Jacobian terms, so marginals of the mapped-back samples match the priors
above.  One MCMC step means one full sweep: a univariate slice-sampling
update of every coordinate in turn.  Interval placement uses doubling
(capped at 10 doublings) followed by shrinkage with the matching
acceptance check, so the chain is a correct sampler for any target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaincinv

from .gp import Dataset, Hypers, NumericalError, log_marginal

MAX_DOUBLINGS = 10
MAX_SHRINK_STEPS = 1000
# Hard bound on sampling coordinates, far outside any plausible prior mass;
# keeps exp() and the kernel arithmetic finite during interval doubling.
_W_BOUND = 250.0


class SamplerStuckError(RuntimeError):
    """Slice shrinkage failed to find an acceptable point."""


@dataclass(frozen=True)
class PriorScales:
    """Static prior knobs taken from the run configuration.

    ``v_noise`` itself is data-relative: ``v_noise_fraction * var(y)`` with
    an absolute floor, resolved per dataset by :meth:`PriorConfig.for_data`.
    """

    v_noise_fraction: float = 0.01
    v_noise_floor: float = 1e-6
    a2: float = 5.0
    alpha_length: float = 2.0
    lambda_length: float = 0.5

    def __post_init__(self):
        if not (
            self.v_noise_fraction > 0
            and self.v_noise_floor > 0
            and self.a2 > 0
            and self.alpha_length > 0
            and self.lambda_length > 0
        ):
            raise ValueError("all prior scales must be strictly positive")


@dataclass(frozen=True)
class PriorConfig:
    """Prior scales resolved against one dataset (concrete v_noise, mu range)."""

    v_noise: float
    a2: float
    alpha_length: float
    lambda_length: float
    mu_range: tuple[float, float]

    def __post_init__(self):
        if not (self.v_noise > 0 and self.a2 > 0 and self.alpha_length > 0 and self.lambda_length > 0):
            raise ValueError("all prior scales must be strictly positive")
        if self.mu_range[0] > self.mu_range[1]:
            raise ValueError("mu_range must be ordered")

    @classmethod
    def for_data(cls, y: np.ndarray, scales: PriorScales) -> "PriorConfig":
        y = np.asarray(y, dtype=float)
        if y.size == 0:
            raise ValueError("cannot resolve priors against an empty dataset")
        v_noise = max(scales.v_noise_fraction * float(np.var(y)), scales.v_noise_floor)
        return cls(
            v_noise=v_noise,
            a2=scales.a2,
            alpha_length=scales.alpha_length,
            lambda_length=scales.lambda_length,
            mu_range=(float(y.min()), float(y.max())),
        )


def log_noise_prior(sigma2: float, v_noise: float) -> float:
    # Worked in log space: the ratio itself overflows for extreme proposals.
    log_ratio = math.log(v_noise) - math.log(sigma2)
    if log_ratio > 18.0:
        return math.log(2.0 * log_ratio)  # log(log1p(x)) ~ log(log(x))
    if log_ratio < -18.0:
        return 2.0 * log_ratio  # log(log1p(x)) ~ log(x)
    return math.log(math.log1p(math.exp(2.0 * log_ratio)))


def log_amp_prior(amp2: float, a2: float) -> float:
    la = math.log(amp2)
    return -la - 0.5 * (la / a2) ** 2


def log_length_prior(theta: float, alpha: float, lam: float) -> float:
    return -(alpha + 1.0) * math.log(theta) - lam / theta


def log_prior(h: Hypers, cfg: PriorConfig) -> float:
    """Unnormalized log prior of one hyper-parameter draw; -inf off support."""
    lo, hi = cfg.mu_range
    if not (lo <= h.mu_bar <= hi):
        return -math.inf
    total = log_noise_prior(h.sigma**2, cfg.v_noise)
    total += log_amp_prior(h.amp**2, cfg.a2)
    for theta in h.lengths:
        total += log_length_prior(float(theta), cfg.alpha_length, cfg.lambda_length)
    return total


def log_posterior(h: Hypers, data: Dataset, cfg: PriorConfig) -> float:
    """Unnormalized log posterior: marginal likelihood plus log prior.

    Factorization failures in the likelihood propagate as
    :class:`~parbo.gp.NumericalError`.
    """
    lp = log_prior(h, cfg)
    if lp == -math.inf:
        return -math.inf
    return log_marginal(data, h) + lp


# -- sampling parameterization ------------------------------------------------

def hypers_to_vector(h: Hypers) -> np.ndarray:
    return np.concatenate(
        [
            [math.log(h.sigma**2), h.mu_bar, math.log(h.amp**2)],
            np.log(h.lengths),
        ]
    )


def vector_to_hypers(w: np.ndarray) -> Hypers:
    w = np.asarray(w, dtype=float)
    return Hypers(
        sigma=math.exp(0.5 * w[0]),
        mu_bar=float(w[1]),
        amp=math.exp(0.5 * w[2]),
        lengths=np.exp(w[3:]),
    )


def _jacobian(w: np.ndarray) -> float:
    # d sigma^2 / d w0 = sigma^2, and likewise for amp^2 and each theta.
    return float(w[0] + w[2] + np.sum(w[3:]))


def prior_log_target(cfg: PriorConfig, dim: int):
    """Log density over the sampling vector whose marginals are the priors."""

    def target(w: np.ndarray) -> float:
        if np.max(np.abs(w)) > _W_BOUND:
            return -math.inf
        h = vector_to_hypers(w)
        lp = log_prior(h, cfg)
        if lp == -math.inf:
            return -math.inf
        return lp + _jacobian(w)

    return target


def posterior_log_target(data: Dataset, cfg: PriorConfig):
    """Log posterior over the sampling vector, Jacobians included.

    Factorization failure at an extreme proposal counts as zero posterior
    mass rather than an error; the public :func:`log_posterior` keeps the
    raising contract.  The amplitude-free kernel profile is cached across
    evaluations: sweeps over the noise, mean and amplitude coordinates
    leave the scaled distances untouched, so only length-scale moves pay
    for a kernel rebuild.
    """
    from scipy.linalg import solve_triangular
    from scipy.spatial.distance import cdist

    from .gp import SQRT5, _chol_with_jitter

    X, y, n = data.X, data.y, data.n
    cache: dict = {"key": None, "profile": None}

    def profile_for(lengths: np.ndarray) -> np.ndarray:
        key = lengths.tobytes()
        if key != cache["key"]:
            r = cdist(X / lengths, X / lengths)
            cache["profile"] = (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * np.exp(-SQRT5 * r)
            cache["key"] = key
        return cache["profile"]

    def target(w: np.ndarray) -> float:
        if np.max(np.abs(w)) > _W_BOUND:
            return -math.inf
        h = vector_to_hypers(w)
        lp = log_prior(h, cfg)
        if lp == -math.inf:
            return -math.inf
        K = h.amp**2 * profile_for(h.lengths)
        K[np.diag_indices_from(K)] += h.sigma**2
        try:
            L, _ = _chol_with_jitter(K, h.amp**2)
        except NumericalError:
            return -math.inf
        z = solve_triangular(L, y - h.mu_bar, lower=True, check_finite=False)
        ll = -0.5 * float(z @ z) - float(np.sum(np.log(np.diag(L)))) \
            - 0.5 * n * math.log(2.0 * math.pi)
        return ll + lp + _jacobian(w)

    return target


# -- slice sampling -----------------------------------------------------------

@dataclass
class McmcState:
    """Chain state: sampling-vector position, cached log target, step widths."""

    position: np.ndarray
    log_post: float
    step_widths: np.ndarray

    @property
    def hypers(self) -> Hypers:
        return vector_to_hypers(self.position)


def _accept_interval(eval1d, x0, x1, log_y, width, left, right) -> bool:
    """Doubling-scheme acceptance check for a shrinkage proposal."""
    differ = False
    while right - left > 1.1 * width:
        mid = 0.5 * (left + right)
        if (x0 < mid) != (x1 < mid):
            differ = True
        if x1 < mid:
            right = mid
        else:
            left = mid
        if differ and log_y >= eval1d(left) and log_y >= eval1d(right):
            return False
    return True


def slice_step(state: McmcState, coord: int, target, rng) -> McmcState:
    """One univariate slice-sampling update of ``state.position[coord]``.

    Interval placement by doubling (at most ``MAX_DOUBLINGS``), then
    shrinkage with the matching acceptance rule.  Raises
    :class:`SamplerStuckError` after ``MAX_SHRINK_STEPS`` rejected proposals.
    """
    if not math.isfinite(state.log_post):
        raise ValueError("slice_step requires a finite starting log density")
    pos = state.position.copy()
    x0 = float(pos[coord])
    width = float(state.step_widths[coord])

    def eval1d(x: float) -> float:
        pos[coord] = x
        return target(pos)

    u = rng.random()
    while u == 0.0:
        u = rng.random()
    log_y = state.log_post + math.log(u)

    left = x0 - width * rng.random()
    right = left + width
    f_left = eval1d(left)
    f_right = eval1d(right)
    doublings = MAX_DOUBLINGS
    while doublings > 0 and (log_y < f_left or log_y < f_right):
        if rng.random() < 0.5:
            left -= right - left
            f_left = eval1d(left)
        else:
            right += right - left
            f_right = eval1d(right)
        doublings -= 1

    lo, hi = left, right
    for _ in range(MAX_SHRINK_STEPS):
        x1 = lo + rng.random() * (hi - lo)
        f1 = eval1d(x1)
        if log_y < f1 and _accept_interval(eval1d, x0, x1, log_y, width, left, right):
            pos[coord] = x1
            return McmcState(pos, f1, state.step_widths)
        if x1 < x0:
            lo = x1
        else:
            hi = x1
    raise SamplerStuckError(f"no acceptable point after {MAX_SHRINK_STEPS} shrink steps")


def sample_chain(target, w0: np.ndarray, widths: np.ndarray, n_sweeps: int, rng,
                 coords=None, thin: int = 1) -> np.ndarray:
    """Run full sweeps of slice sampling, recording every ``thin``-th sweep.

    Returns the recorded positions as a ``(n_sweeps // thin, len(w0))``
    array.  ``coords`` restricts which coordinates are updated.
    """
    w0 = np.asarray(w0, dtype=float)
    widths = np.asarray(widths, dtype=float)
    if coords is None:
        coords = range(w0.size)
    lp = target(w0)
    if not math.isfinite(lp):
        raise ValueError("initial position has zero target mass")
    state = McmcState(w0.copy(), lp, widths)
    out = []
    for sweep in range(1, n_sweeps + 1):
        for i in coords:
            state = slice_step(state, i, target, rng)
        if sweep % thin == 0:
            out.append(state.position.copy())
    return np.array(out) if out else np.empty((0, w0.size))


# -- chain setup and the top-level sampler -------------------------------------

def noise_prior_cdf(t: float, v_noise: float) -> float:
    """Exact CDF of the normalized noise-variance prior."""
    c = v_noise
    if t <= 0.0:
        return 0.0
    return (t * math.log1p((c / t) ** 2) + 2.0 * c * math.atan(t / c)) / (math.pi * c)


def noise_prior_median(v_noise: float) -> float:
    return brentq(lambda t: noise_prior_cdf(t, v_noise) - 0.5,
                  1e-12 * v_noise, 1e12 * v_noise)


def prior_median_hypers(cfg: PriorConfig, dim: int) -> Hypers:
    """Per-marginal prior medians; the chain's cold-start point."""
    # inverse-gamma median: scale / gammaincinv(shape, 1/2)
    length_med = cfg.lambda_length / float(gammaincinv(cfg.alpha_length, 0.5))
    return Hypers(
        sigma=math.sqrt(noise_prior_median(cfg.v_noise)),
        mu_bar=0.5 * (cfg.mu_range[0] + cfg.mu_range[1]),
        amp=1.0,  # log-normal on amp^2 is centered at log amp^2 = 0
        lengths=np.full(dim, length_med),
    )


def default_step_widths(cfg: PriorConfig, dim: int) -> np.ndarray:
    widths = np.ones(dim + 3)
    mu_span = cfg.mu_range[1] - cfg.mu_range[0]
    widths[1] = 0.1 * mu_span if mu_span > 0 else 1.0
    return widths


def sample_hypers(data: Dataset, cfg: PriorConfig, init: Hypers, t_mcmc: int, seed) -> Hypers:
    """Draw one hyper-parameter sample after ``t_mcmc`` full MCMC sweeps.

    The chain starts from ``init`` with its mean clamped into the prior
    range; ``t_mcmc == 0`` returns ``init`` untouched.  ``seed`` may be an
    integer, a ``SeedSequence``, or an existing ``Generator``.
    """
    if data.n == 0:
        raise ValueError("sample_hypers needs a nonempty dataset")
    if t_mcmc == 0:
        return init
    rng = np.random.default_rng(seed)
    lo, hi = cfg.mu_range
    mu0 = min(max(init.mu_bar, lo), hi)
    start = Hypers(init.sigma, mu0, init.amp, init.lengths)
    w0 = hypers_to_vector(start)
    coords = list(range(w0.size))
    if hi == lo:
        coords.remove(1)  # degenerate flat prior pins the mean
    target = posterior_log_target(data, cfg)
    if not math.isfinite(target(w0)):
        w0 = hypers_to_vector(prior_median_hypers(cfg, data.dim))
    samples = sample_chain(target, w0, default_step_widths(cfg, data.dim),
                           n_sweeps=t_mcmc, rng=rng, coords=coords, thin=t_mcmc)
    return vector_to_hypers(samples[-1])
