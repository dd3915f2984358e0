"""Mallows model: partition function, moments, backward map, sampler."""

import math
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from uws import mallows
from uws import permutations as perm
from uws.errors import DomainError, InfeasibleMeanError


def brute_force_distances(rho):
    """Kendall distances from every element of S_rho to the identity."""
    perms = perm.all_permutations(rho)
    e = perm.identity(rho)
    return perms, np.array([perm.kendall_tau(p, e) for p in perms])


class TestLogPartitionFunction:
    def test_single_permutation(self):
        assert mallows.log_partition_function(2.0, 1) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 5.0])
    @pytest.mark.parametrize("rho", [2, 3, 4, 5])
    def test_matches_brute_force_sum(self, theta, rho):
        _, dists = brute_force_distances(rho)
        log_z = math.log(np.exp(-theta * dists).sum())
        assert mallows.log_partition_function(theta, rho) == pytest.approx(log_z, rel=1e-12)

    def test_degenerate_limit(self):
        # only the center survives as theta grows
        assert mallows.log_partition_function(60.0, 6) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_nonpositive_theta(self):
        with pytest.raises(DomainError):
            mallows.log_partition_function(0.0, 4)
        with pytest.raises(DomainError):
            mallows.log_partition_function(-1.0, 4)


class TestExpectedDistance:
    def test_collapses_at_large_theta(self):
        assert mallows.expected_distance(60.0, 5) == pytest.approx(0.0, abs=1e-20)

    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 5.0])
    @pytest.mark.parametrize("rho", [3, 4, 5])
    def test_matches_exhaustive_enumeration(self, theta, rho):
        _, dists = brute_force_distances(rho)
        w = np.exp(-theta * dists)
        expected = float((dists * w).sum() / w.sum())
        assert mallows.expected_distance(theta, rho) == pytest.approx(expected, rel=1e-13)

    def test_uniform_limit(self):
        # theta -> 0+ approaches rho(rho-1)/4; S_4 uniform mean inversion count is 3
        _, dists = brute_force_distances(4)
        assert dists.mean() == pytest.approx(3.0)
        assert mallows.expected_distance(1e-9, 4) == pytest.approx(3.0, rel=1e-6)
        assert mallows.uniform_mean_distance(4) == 3.0

    @pytest.mark.parametrize("rho", range(3, 13))
    def test_strictly_decreasing_in_theta(self, rho):
        grid = np.linspace(0.01, 20.0, 120)
        vals = [mallows.expected_distance(t, rho) for t in grid]
        assert all(b < a for a, b in zip(vals, vals[1:]))


class TestDerivative:
    def test_matches_central_finite_differences(self):
        for rho in (5, 8):
            for theta in (0.5, 1.0, 5.0):
                h = 1e-6 * max(theta, 1.0)
                fd = (
                    mallows.expected_distance(theta + h, rho)
                    - mallows.expected_distance(theta - h, rho)
                ) / (2 * h)
                g = mallows.expected_distance_derivative(theta, rho)
                assert g < 0
                assert abs(g - fd) < 1e-6 * abs(g)

    def test_nonpositive_beyond_lemma_threshold(self):
        # threshold 4*ln(2) from the monotonicity region of the derivative
        thr = 4 * math.log(2)
        for rho in (3, 6, 10):
            for theta in np.linspace(thr + 1e-9, 12.0, 40):
                assert mallows.expected_distance_derivative(theta, rho) <= 0

    def test_decreasing_in_rho_at_fixed_theta(self):
        thr = 4 * math.log(2)
        for theta in (thr + 0.05, 3.5, 6.0):
            vals = [mallows.expected_distance_derivative(theta, rho) for rho in range(2, 12)]
            assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


class TestBackwardMap:
    @pytest.mark.parametrize("theta", [3.0, 5.0, 8.0])
    def test_roundtrip(self, theta):
        mean = mallows.expected_distance(theta, 6)
        assert mallows.backward_map(mean, 6) == pytest.approx(theta, abs=1e-8)

    def test_roundtrip_at_lemma_boundary(self):
        theta = 4 * math.log(2) + 0.1
        mean = mallows.expected_distance(theta, 5)
        assert mallows.backward_map(mean, 5) == pytest.approx(theta, abs=1e-8)

    def test_roundtrip_grid(self):
        for rho in (5, 10):
            for theta in np.arange(3.0, 8.0 + 1e-9, 0.5):
                mean = mallows.expected_distance(theta, rho)
                assert mallows.backward_map(mean, rho) == pytest.approx(theta, abs=1e-8)

    def test_infeasible_means(self):
        with pytest.raises(InfeasibleMeanError):
            mallows.backward_map(mallows.uniform_mean_distance(5), 5)
        with pytest.raises(InfeasibleMeanError):
            mallows.backward_map(0.0, 5)
        with pytest.raises(InfeasibleMeanError):
            mallows.backward_map(-0.3, 5)

    def test_residual_tolerance(self):
        theta_hat = mallows.backward_map(2.0, 7)
        assert abs(mallows.expected_distance(theta_hat, 7) - 2.0) <= 1e-10


class TestSampler:
    def test_near_degenerate_returns_center(self):
        center = np.array([3, 0, 4, 1, 2])
        model = mallows.MallowsModel(center, 50.0)
        rng = np.random.default_rng(0)
        draws = mallows.sample_many(model, rng, 1000)
        assert (draws == center).all()

    def test_outputs_are_permutations(self):
        model = mallows.MallowsModel(perm.identity(6), 0.7)
        rng = np.random.default_rng(1)
        draws = mallows.sample_many(model, rng, 200)
        for d in draws:
            perm.check_permutation(d)

    def test_uniform_at_theta_zero_chi2(self):
        model = mallows.MallowsModel(perm.identity(4), 0.0)
        rng = np.random.default_rng(2)
        draws = mallows.sample_many(model, rng, 100_000)
        counts = Counter(tuple(d) for d in draws)
        assert len(counts) == 24
        expected = 100_000 / 24
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        assert chi2 < stats.chi2.ppf(0.999, 23)

    def test_empirical_mean_distance(self):
        model = mallows.MallowsModel(perm.identity(6), 1.0)
        rng = np.random.default_rng(3)
        draws = mallows.sample_many(model, rng, 50_000)
        centers = np.broadcast_to(model.center, draws.shape)
        mean = perm.kendall_tau_many(draws, centers).mean()
        target = mallows.expected_distance(1.0, 6)
        assert abs(mean - target) < 0.01 * target

    @pytest.mark.parametrize("theta", [0.5, 1.5])
    def test_exact_frequencies_total_variation(self, theta):
        rho = 5
        center = np.array([4, 2, 0, 3, 1])
        perms, _ = brute_force_distances(rho)
        dists = np.array([perm.kendall_tau(p, center) for p in perms])
        w = np.exp(-theta * dists)
        probs = w / w.sum()
        model = mallows.MallowsModel(center, theta)
        rng = np.random.default_rng(4)
        draws = mallows.sample_many(model, rng, 200_000)
        counts = Counter(tuple(d) for d in draws)
        emp = np.array([counts.get(tuple(p), 0) for p in perms]) / 200_000
        tv = 0.5 * np.abs(emp - probs).sum()
        assert tv < 0.01

    def test_seed_reproducibility(self):
        model = mallows.MallowsModel(perm.identity(7), 0.8)
        a = mallows.sample_many(model, np.random.default_rng(99), 50)
        b = mallows.sample_many(model, np.random.default_rng(99), 50)
        assert (a == b).all()

    def test_single_draw_matches_batch_head(self):
        model = mallows.MallowsModel(perm.identity(5), 1.2)
        single = mallows.sample(model, np.random.default_rng(7))
        batch = mallows.sample_many(model, np.random.default_rng(7), 1)
        assert (single == batch[0]).all()

    def test_rejects_negative_theta(self):
        with pytest.raises(DomainError):
            mallows.MallowsModel(perm.identity(4), -0.1)
