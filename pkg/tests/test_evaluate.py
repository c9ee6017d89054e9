import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsnovelty.errors import ContractViolationError
from tsnovelty.evaluate import (
    RocReport,
    auroc_bruteforce,
    roc_points,
    save_roc,
    wasserstein_critic,
    wasserstein_uniform_exact,
)


class TestRocPoints:
    def test_hand_worked_example(self):
        # normal p-values {0.8, 0.35}, novel {0.4, 0.05}
        report = roc_points([0.8, 0.35], [0.4, 0.05])
        assert report.auroc == pytest.approx(0.75)

    def test_perfect_separation(self):
        report = roc_points([0.5, 0.6, 0.9], [0.001, 0.002, 0.003])
        assert report.auroc == 1.0

    def test_identical_scores_give_half(self):
        report = roc_points([0.3, 0.3], [0.3, 0.3])
        assert report.auroc == pytest.approx(0.5)

    def test_curve_endpoints_and_monotonicity(self):
        rng = np.random.default_rng(0)
        report = roc_points(rng.uniform(size=50), rng.uniform(size=40))
        assert report.points[0] == (0.0, 0.0)
        assert report.points[-1] == (1.0, 1.0)
        fprs = [p[0] for p in report.points]
        tprs = [p[1] for p in report.points]
        assert fprs == sorted(fprs)
        assert tprs == sorted(tprs)

    def test_empty_rejected(self):
        with pytest.raises(ContractViolationError):
            roc_points([], [0.1])

    def test_matches_bruteforce_on_random_sets(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            n0 = int(rng.integers(1, 30))
            n1 = int(rng.integers(1, 30))
            # coarse grid forces ties
            h0 = rng.integers(0, 6, size=n0) / 5.0
            h1 = rng.integers(0, 6, size=n1) / 5.0
            trap = roc_points(h0, h1).auroc
            brute = auroc_bruteforce(h0, h1)
            assert abs(trap - brute) < 1e-12

    @given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=20),
           st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=20))
    @settings(max_examples=100, deadline=None)
    def test_trapezoid_equals_pairwise_property(self, h0, h1):
        assert abs(roc_points(h0, h1).auroc
                   - auroc_bruteforce(h0, h1)) < 1e-12


class TestAurocBruteforce:
    def test_reversed_scores_complement(self):
        rng = np.random.default_rng(2)
        h0 = rng.uniform(size=17)
        h1 = rng.uniform(size=13)
        assert auroc_bruteforce(h0, h1) == pytest.approx(
            1.0 - auroc_bruteforce(h1, h0))

    def test_all_ties(self):
        assert auroc_bruteforce([0.5] * 4, [0.5] * 3) == 0.5


class TestSaveRoc:
    def test_csv_and_summary(self, tmp_path):
        report = RocReport(points=[(0.0, 0.0), (0.25, 1.0), (1.0, 1.0)],
                           auroc=0.875)
        csv_path = tmp_path / "roc.csv"
        summary_path = tmp_path / "roc.json"
        save_roc(report, csv_path, summary_path, n_h0=4, n_h1=2)
        lines = csv_path.read_text().strip().split("\n")
        assert lines[0] == "fpr,tpr"
        assert len(lines) == 4
        summary = json.loads(summary_path.read_text())
        assert summary == {"auroc": 0.875, "n_h0": 4, "n_h1": 2}


class TestWassersteinCritic:
    def test_identical_distributions_near_zero(self):
        rng = np.random.default_rng(3)
        a = rng.uniform(-1, 1, size=(2000, 1))
        b = rng.uniform(-1, 1, size=(2000, 1))
        est = wasserstein_critic(a, b, repeats=1, steps=300)
        assert abs(est.mean) <= 0.05

    def test_shift_is_detected(self):
        rng = np.random.default_rng(4)
        base = rng.uniform(-1, 1, size=(2000, 1))
        est = wasserstein_critic(base + 1.0, base, repeats=1, steps=400)
        assert est.mean > 0.3

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(7)
        a = rng.uniform(size=(500, 1)) + 0.5
        b = rng.uniform(size=(500, 1))
        e1 = wasserstein_critic(a, b, repeats=1, steps=100, seed=3)
        e2 = wasserstein_critic(b, a, repeats=1, steps=100, seed=3)
        assert e1.mean == pytest.approx(e2.mean, abs=0.1)
        assert e1.mean > 0.0

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(5)
        a = rng.uniform(size=(50, 2))
        b = rng.uniform(size=(50, 2)) + 0.2
        e1 = wasserstein_critic(a, b, repeats=1, steps=30, seed=9)
        e2 = wasserstein_critic(a, b, repeats=1, steps=30, seed=9)
        assert e1 == e2

    def test_repeats_populate_std(self):
        rng = np.random.default_rng(6)
        a = rng.uniform(size=(40, 2))
        b = rng.uniform(size=(40, 2))
        est = wasserstein_critic(a, b, repeats=2, steps=20)
        assert est.repeats == 2
        assert est.std >= 0.0

    def test_input_validation(self):
        with pytest.raises(ContractViolationError):
            wasserstein_critic(np.zeros((0, 3)), np.zeros((5, 3)))
        with pytest.raises(ContractViolationError):
            wasserstein_critic(np.zeros((5, 3)), np.zeros((5, 4)))
        with pytest.raises(ContractViolationError):
            wasserstein_critic(np.zeros((5, 3)), np.zeros((5, 3)), repeats=0)


class TestWassersteinUniformExact:
    def test_point_mass_at_midpoint(self):
        # all mass at the centre of [lo, hi]: W1 = (hi - lo) / 4
        assert wasserstein_uniform_exact([0.0]) == pytest.approx(0.5)
        assert wasserstein_uniform_exact([2.0], lo=1.0, hi=3.0) == pytest.approx(0.5)

    def test_quantile_grid_nearly_zero(self):
        k = 1000
        grid = -1.0 + 2.0 * (np.arange(k) + 0.5) / k
        assert wasserstein_uniform_exact(grid) <= 2.0 / (4 * k) + 1e-12

    def test_shifted_grid_recovers_shift(self):
        k = 500
        grid = -1.0 + 2.0 * (np.arange(k) + 0.5) / k
        assert wasserstein_uniform_exact(grid + 0.37) == pytest.approx(0.37)

    def test_matches_scipy_against_dense_uniform(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = np.random.default_rng(11)
        dense = -1.0 + 2.0 * (np.arange(200_000) + 0.5) / 200_000
        for x in (rng.normal(0.0, 0.3, size=400),
                  rng.uniform(-1.0, 1.0, size=1000),
                  rng.beta(2.0, 5.0, size=300) * 2.0 - 1.0):
            oracle = scipy_stats.wasserstein_distance(x, dense)
            assert wasserstein_uniform_exact(x) == pytest.approx(oracle, abs=1e-4)

    def test_input_validation(self):
        with pytest.raises(ContractViolationError):
            wasserstein_uniform_exact([])
        with pytest.raises(ContractViolationError):
            wasserstein_uniform_exact([0.0], lo=1.0, hi=1.0)
