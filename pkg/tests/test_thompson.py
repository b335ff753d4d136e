import math

import numpy as np
import pytest
from scipy import stats

from parbo.chooser import ChooserConfig
from parbo.gp import Dataset, Hypers, fit, matern52, predict
from parbo.thompson import (
    SampledFunction,
    barrier,
    nelder_mead_max,
    sample_candidate,
    variance_threshold,
)


def prior_base(amp=1.0, mu=0.0, lengths=(0.3, 0.3)):
    h = Hypers(0.1, mu, amp, np.array(lengths))
    return fit(Dataset.empty(len(lengths)), h)


def small_base(seed=0, n=4, dim=2, sigma=0.1):
    rng = np.random.default_rng(seed)
    h = Hypers(sigma, 0.5, 1.0, np.full(dim, 0.3))
    data = Dataset(rng.random((n, dim)), rng.normal(size=n))
    return fit(data, h)


class TestSampledFunction:
    def test_first_query_prior_marginal(self):
        # fresh draws at a fixed point follow the prior N(0, 1)
        base = prior_base()
        x = np.array([0.4, 0.6])
        rng = np.random.default_rng(11)
        vals = np.array([SampledFunction(base, rng).query(x) for _ in range(10_000)])
        assert stats.kstest(vals, "norm").statistic < 0.05

    def test_requery_is_bit_identical(self):
        base = small_base()
        sf = SampledFunction(base, np.random.default_rng(1))
        x = np.array([0.3, 0.8])
        v1 = sf.query(x)
        for other in np.random.default_rng(2).random((5, 2)):
            sf.query(other)
        assert sf.query(x) == v1

    def test_pairwise_correlation_matches_kernel(self):
        base = prior_base()
        x1 = np.array([0.5, 0.5])
        x2 = np.array([0.5, 0.65])
        want = matern52(x1, x2, base.hypers) / base.hypers.amp**2
        rng = np.random.default_rng(3)
        pairs = np.array(
            [
                (lambda sf: (sf.query(x1), sf.query(x2)))(SampledFunction(base, rng))
                for _ in range(10_000)
            ]
        )
        got = np.corrcoef(pairs.T)[0, 1]
        assert abs(got - want) < 0.03

    def test_first_query_matches_predict(self):
        base = small_base(seed=5)
        rng = np.random.default_rng(4)
        for x in np.random.default_rng(6).random((3, 2)):
            mean, var = predict(base, x)
            vals = np.array([SampledFunction(base, rng).query(x) for _ in range(4000)])
            se = math.sqrt(var / vals.size)
            assert abs(vals.mean() - mean) < 3 * se + 1e-12
            assert abs(vals.var() - var) < 0.1 * var + 1e-12

    def test_factor_grows_one_row_per_new_location(self):
        base = small_base()
        sf = SampledFunction(base, np.random.default_rng(7), capacity=4)
        pts = np.random.default_rng(8).random((20, 2))
        for i, x in enumerate(pts):
            sf.query(x)
            assert sf.n_queried == i + 1
        sf.query(pts[0])  # memo hit: no growth
        assert sf.n_queried == 20

    def test_near_duplicate_query_degenerates_to_mean(self):
        base = small_base()
        sf = SampledFunction(base, np.random.default_rng(9))
        x = np.array([0.5, 0.5])
        v1 = sf.query(x)
        v2 = sf.query(x + 1e-13)
        assert v2 == pytest.approx(v1, abs=1e-5)
        # the floored pivot keeps later extensions usable
        v3 = sf.query(np.array([0.9, 0.1]))
        assert math.isfinite(v3)

    def test_joint_law_consistent_with_conditioning(self):
        # query x1 then x2: conditionals compose to the right joint covariance
        base = prior_base(lengths=(0.4, 0.4))
        x1 = np.array([0.3, 0.3])
        x2 = np.array([0.45, 0.3])
        rng = np.random.default_rng(10)
        draws = np.array(
            [
                (lambda sf: (sf.query(x1), sf.query(x2)))(SampledFunction(base, rng))
                for _ in range(10_000)
            ]
        )
        cov = np.cov(draws.T)
        want = matern52(x1, x2, base.hypers)
        assert cov[0, 0] == pytest.approx(1.0, abs=0.05)
        assert cov[1, 1] == pytest.approx(1.0, abs=0.05)
        assert cov[0, 1] == pytest.approx(want, abs=0.05)


class TestNelderMead:
    def test_smooth_unimodal_reaches_center(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            x0 = rng.uniform(0.1, 0.9, 3)
            x, _ = nelder_mead_max(
                lambda u: -float(np.sum((u - 0.5) ** 2)), x0, 1e-5, max_evals=2000
            )
            assert np.linalg.norm(x - 0.5) < 1e-5 * math.sqrt(3) * 10

    def test_constant_objective_returns_start(self):
        x0 = np.array([0.3, 0.7])
        x, val = nelder_mead_max(lambda u: 1.5, x0, 1e-4, max_evals=500)
        assert np.array_equal(x, x0)
        assert val == 1.5

    def test_banana_valley_against_grid_oracle(self):
        def bowl(u):
            # curved-valley bowl with its optimum at (0.7, 0.3)
            return -(100.0 * (u[1] - 0.3 - (u[0] - 0.7) ** 2) ** 2 + (u[0] - 0.7) ** 2)

        g = np.linspace(0.0, 1.0, 401)
        G0, G1 = np.meshgrid(g, g, indexing="ij")
        grid_best = np.max(
            -(100.0 * (G1 - 0.3 - (G0 - 0.7) ** 2) ** 2 + (G0 - 0.7) ** 2)
        )
        x, val = nelder_mead_max(bowl, np.array([0.2, 0.8]), 1e-7, max_evals=4000)
        assert val >= grid_best - 1e-4

    def test_budget_bound(self):
        calls = 0

        def counted(u):
            nonlocal calls
            calls += 1
            return -float(np.sum(u**2))

        nelder_mead_max(counted, np.array([0.5, 0.5, 0.5]), 1e-12, max_evals=77)
        assert calls <= 77

    def test_iterates_stay_in_cube(self):
        seen = []

        def spy(u):
            seen.append(u.copy())
            return float(np.sum(u))  # pushes toward the (1, ..., 1) corner

        nelder_mead_max(spy, np.array([0.9, 0.9]), 1e-6, max_evals=300)
        pts = np.array(seen)
        assert pts.min() >= 0.0 and pts.max() <= 1.0


class TestBarrier:
    def test_at_threshold(self):
        assert barrier(0.2, 0.2, 10.0) == 1.0

    def test_above_threshold_decays(self):
        assert barrier(0.4, 0.2, 10.0) == pytest.approx(2.0**-10, rel=1e-12)

    def test_below_threshold_explodes(self):
        assert barrier(0.1, 0.2, 10.0) == pytest.approx(1024.0, rel=1e-12)

    def test_zero_sd_is_infinite(self):
        assert barrier(0.0, 0.2, 10.0) == math.inf

    def test_nonnegative_so_penalized_draw_never_exceeds_draw(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            s, t, z = rng.uniform(1e-6, 5, 3)
            assert barrier(s, t, z) >= 0.0


class TestSampleCandidate:
    def test_prior_candidates_spread_over_cube(self):
        base = prior_base()
        cfg = ChooserConfig()
        rng = np.random.default_rng(13)
        xs = np.array([sample_candidate(base, cfg, rng).x for _ in range(1000)])
        assert np.all(np.abs(xs.mean(axis=0) - 0.5) < 0.1)

    def test_same_seed_same_candidate(self):
        base = small_base()
        cfg = ChooserConfig()
        c1 = sample_candidate(base, cfg, np.random.default_rng(14))
        c2 = sample_candidate(base, cfg, np.random.default_rng(14))
        assert np.array_equal(c1.x, c2.x)
        assert c1.fhat == c2.fhat and c1.sd == c2.sd

    def test_barrier_mode_avoids_sampled_cluster(self):
        # tight cluster of observations: candidates should stay where the
        # predictive spread still exceeds the control level
        rng = np.random.default_rng(15)
        X = 0.5 + 0.02 * rng.standard_normal((16, 2)).clip(-2, 2)
        y = rng.normal(size=16) * 0.1
        h = Hypers(0.2, 0.0, 1.0, np.array([0.3, 0.3]))
        base = fit(Dataset(np.clip(X, 0, 1), y), h)
        cfg = ChooserConfig(rho=0.5)
        tau = variance_threshold(cfg, h.sigma)
        hits = sum(
            sample_candidate(base, cfg, rng, mode="barrier").sd > tau for _ in range(1000)
        )
        assert hits >= 990

    def test_candidate_sd_matches_predict(self):
        base = small_base()
        cfg = ChooserConfig()
        c = sample_candidate(base, cfg, np.random.default_rng(16))
        assert c.sd == pytest.approx(math.sqrt(predict(base, c.x)[1]), rel=1e-12)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            sample_candidate(small_base(), ChooserConfig(), np.random.default_rng(0), mode="hard")
