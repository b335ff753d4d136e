import math

import numpy as np
import pytest
from scipy.optimize import minimize

from parbo.objectives import get_objective


class TestSphere:
    def test_origin_is_global_max(self):
        obj = get_objective("sphere", dim=4)
        assert obj(np.zeros(4)) == 0.0
        rng = np.random.default_rng(0)
        for x in rng.uniform(-5.12, 5.12, (50, 4)):
            assert obj(x) <= 0.0

    def test_any_dimension(self):
        assert get_objective("sphere", dim=7).dim == 7

    def test_batch_matches_scalar(self):
        obj = get_objective("sphere", dim=3)
        X = np.random.default_rng(1).uniform(-5, 5, (10, 3))
        batch = obj.batch(X)
        for i, x in enumerate(X):
            assert batch[i] == obj(x)


class TestBranin:
    def test_hand_evaluated_point(self):
        # formula evaluated by hand at (0, 0):
        # (0 - 0 + 0 - 6)^2 + 10 (1 - 1/(8 pi)) cos(0) + 10 = 36 + 10 (1 - 1/(8 pi)) + 10
        obj = get_objective("branin")
        want = -(36.0 + 10.0 * (1.0 - 1.0 / (8.0 * math.pi)) + 10.0)
        assert obj(np.zeros(2)) == pytest.approx(want, rel=1e-12)

    def test_three_known_optima_share_best_value(self):
        obj = get_objective("branin")
        for x in ([-math.pi, 12.275], [math.pi, 2.275], [9.42478, 2.475]):
            assert obj(np.array(x)) == pytest.approx(obj.best_value, abs=1e-5)

    def test_grid_oracle_confirms_best_value(self):
        obj = get_objective("branin")
        g1 = np.linspace(-5, 10, 601)
        g2 = np.linspace(0, 15, 601)
        G = np.stack(np.meshgrid(g1, g2, indexing="ij"), -1).reshape(-1, 2)
        grid_max = obj.batch(G).max()
        assert grid_max <= obj.best_value + 1e-12
        assert grid_max > obj.best_value - 5e-3  # grid resolution bound

    def test_dimension_enforced(self):
        with pytest.raises(ValueError):
            get_objective("branin", dim=3)


class TestHartmann6:
    def test_stored_optimum_is_consistent(self):
        obj = get_objective("hartmann6")
        assert obj(obj.best_x) == pytest.approx(obj.best_value, rel=1e-9)

    def test_multistart_oracle_confirms_best_value(self):
        # independent oracle: dense random starts refined with scipy's simplex
        obj = get_objective("hartmann6")
        rng = np.random.default_rng(2)
        X = rng.random((20_000, 6))
        vals = obj.batch(X)
        best = -np.inf
        for x0 in X[np.argsort(vals)[-20:]]:
            res = minimize(lambda x: -obj(np.clip(x, 0, 1)), x0, method="Nelder-Mead",
                           options={"xatol": 1e-8, "fatol": 1e-12, "maxfev": 4000})
            best = max(best, -res.fun)
        assert best == pytest.approx(obj.best_value, abs=1e-6)

    def test_values_bounded(self):
        obj = get_objective("hartmann6")
        X = np.random.default_rng(3).random((100, 6))
        vals = obj.batch(X)
        assert np.all(vals > 0.0) and np.all(vals <= obj.best_value + 1e-9)


def test_unknown_objective_rejected():
    with pytest.raises(ValueError, match="unknown objective"):
        get_objective("rastrigin-misspelled")
