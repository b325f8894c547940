#!/usr/bin/env python3
"""
Tests for the concentration function Q(F, lambda).
"""

from fractions import Fraction
from math import comb

import numpy as np
import pytest

from smallball.concentration import (
    discrete_sampler,
    draw_samples,
    point_sampler,
    q_brute_force,
    q_coordinate_bounds,
    q_exact,
    q_monte_carlo,
    q_weighted_sum,
    q_window_regularity,
    uniform_sampler,
    weighted_sum_sampler,
)
from smallball.dist import make_discrete, named_law, weighted_sum_law
from smallball.exceptions import DegenerateEstimateError, InvalidParameterError
from smallball.models.concentration import ConcentrationResult, MCConfig, Method
from smallball.models.dist import WeightVector


class TestExactConcentration:
    """Tests for the exact sliding window."""

    def test_point_mass(self):
        """Q of a point mass is 1 for every lambda."""
        F = named_law("point")
        assert q_exact(F, 0).value == 1
        assert q_exact(F, 5).value == 1

    def test_closed_window(self):
        """Atoms at distance exactly lambda share a window."""
        F = named_law("bernoulli")
        assert q_exact(F, Fraction(99, 100)).value == Fraction(1, 2)
        assert q_exact(F, 1).value == 1

    def test_center_lies_in_window(self):
        """The reported center is the left atom plus lambda/2."""
        F = make_discrete([0, 10, 11], ["1/4", "1/2", "1/4"])
        result = q_exact(F, 1)
        assert result.value == Fraction(3, 4)
        assert result.optimal_center == (Fraction(21, 2),)
        assert result.method == Method.EXACT
        assert result.stderr == 0

    def test_negative_lambda(self):
        """A negative window width is rejected."""
        with pytest.raises(InvalidParameterError):
            q_exact(named_law("lazy"), -1)

    @pytest.mark.parametrize("n", list(range(2, 31)))
    def test_rademacher_ones(self, n):
        """Q(F_a, 0) for the ones vector is the central binomial probability."""
        a = WeightVector.of([1] * n)
        result = q_weighted_sum(a, named_law("rademacher"), 0)
        assert result.value == Fraction(comb(n, n // 2), 2 ** n)

    def test_sixteen_ones(self):
        """The canonical value for n = 16."""
        result = q_weighted_sum(WeightVector.of([1] * 16), named_law("rademacher"), 0)
        assert result.value == Fraction(6435, 32768)
        assert str(result.value) == "6435/32768"

    @pytest.mark.parametrize("lam", [0, Fraction(1, 2), 1, 2, Fraction(7, 3), 5, 40])
    def test_matches_brute_force(self, lam):
        """The sweep agrees with trying every candidate center."""
        a = WeightVector.of([1, 2, 3, 5, Fraction(1, 2), 7])
        F = weighted_sum_law(a, named_law("uniform3"))
        assert q_exact(F, lam).value == q_brute_force(F, lam)

    def test_monotone_in_lambda(self):
        """Q is nondecreasing in lambda."""
        F = weighted_sum_law(WeightVector.of([1, 3, 4, 9]), named_law("lazy"))
        values = [q_exact(F, lam).value for lam in range(0, 40)]
        assert values == sorted(values)
        assert values[-1] == 1


class TestWindowRegularity:
    """Tests for Q(F, m*lambda) <= m * Q(F, lambda)."""

    @pytest.mark.parametrize("m", [1, 2, 3, 7])
    def test_holds_for_discrete_laws(self, m):
        """The covering inequality always holds."""
        F = weighted_sum_law(WeightVector.of([1, 2, 2, 5, 11]), named_law("rademacher"))
        report = q_window_regularity(F, 1, m)
        assert report.extras["holds"]
        assert report.implied_constant <= m
        assert not report.flags

    def test_rejects_zero_m(self):
        """m must be a positive integer."""
        with pytest.raises(InvalidParameterError):
            q_window_regularity(named_law("lazy"), 1, 0)


class TestMonteCarlo:
    """Tests for the sampled estimate."""

    def test_deterministic_for_seed(self):
        """A fixed seed gives bit-identical results."""
        cfg = MCConfig(sample_count=5000, seed=17)
        sampler = discrete_sampler(named_law("uniform3"))
        first = q_monte_carlo(sampler, 0, cfg)
        second = q_monte_carlo(sampler, 0, cfg)
        assert first.value == second.value
        assert first.optimal_center == second.optimal_center

    def test_substreams_split_budget(self):
        """The substreams together draw exactly the sample budget."""
        cfg = MCConfig(sample_count=1001, seed=3, substreams=4)
        samples = draw_samples(uniform_sampler(), cfg)
        assert samples.shape == (1001,)

    def test_estimate_close_to_exact(self):
        """The estimate of a discrete law lies within a few standard errors."""
        a = WeightVector.of([1] * 10)
        dist = named_law("rademacher")
        exact = q_weighted_sum(a, dist, 0).value
        estimate = q_monte_carlo(weighted_sum_sampler(a, dist), 0, MCConfig(sample_count=40_000, seed=1))
        assert estimate.method == Method.MONTE_CARLO
        assert abs(estimate.value - float(exact)) < 5 * estimate.stderr + 1e-3

    def test_zero_window_on_continuous_law(self):
        """lambda = 0 on a continuous law carries no information."""
        with pytest.raises(DegenerateEstimateError):
            q_monte_carlo(uniform_sampler(), 0, MCConfig(sample_count=1000, seed=0))

    def test_point_mass_is_certain(self):
        """All samples of a point mass fall in every window."""
        result = q_monte_carlo(point_sampler(2.5), 0, MCConfig(sample_count=100, seed=0))
        assert result.value == 1.0
        assert result.stderr == 0.0

    def test_uniform_window(self):
        """Q(U[0,1], 1/2) is about 1/2."""
        result = q_monte_carlo(uniform_sampler(), 0.5, MCConfig(sample_count=20_000, seed=5))
        assert 0.48 < result.value < 0.56

    def test_two_dimensional_ball(self):
        """A planar uniform law puts little mass in any small disc."""
        sampler = uniform_sampler(0.0, 1.0, d=2)
        result = q_monte_carlo(sampler, 0.2, MCConfig(sample_count=4000, seed=2, center_grid_resolution=64))
        assert 0 < result.value < 0.1
        assert len(result.optimal_center) == 2

    def test_point_mass_estimate_is_still_monte_carlo(self):
        """A degenerate sample gives a Monte Carlo result with zero standard error."""
        result = q_monte_carlo(point_sampler(-1.0), 0.5, MCConfig(sample_count=500, seed=4))
        assert result.method == Method.MONTE_CARLO
        assert result.stderr == 0.0
        assert result.value == 1.0

    def test_exact_result_rejects_stderr(self):
        """Only Monte Carlo results may carry a standard error."""
        with pytest.raises(ValueError):
            ConcentrationResult(value=0.5, method=Method.EXACT, stderr=0.1, optimal_center=(0.0,))

    def test_dense_cluster_drawn_last(self):
        """Candidate centers come from the whole sample, not just its head."""
        def draw(rng, size):
            spread = size * 3 // 10
            head = rng.uniform(10.0, 20.0, size=(spread, 2))
            tail = rng.normal(0.0, 0.01, size=(size - spread, 2))
            return np.vstack([head, tail])

        cfg = MCConfig(sample_count=1000, seed=6, substreams=1, center_grid_resolution=16)
        result = q_monte_carlo(draw, 0.2, cfg)
        assert 0.65 <= result.value <= 0.7
        assert np.hypot(*result.optimal_center) < 0.1


class TestCoordinateBounds:
    """Tests for the per-coordinate values q_j."""

    def test_independent_coordinates(self):
        """With single-coordinate entries the joint value at 0 is the product."""
        a = WeightVector.of([(1, 0), (1, 0), (0, 1), (0, 1)])
        bounds = q_coordinate_bounds(a, named_law("rademacher"), 0)
        assert bounds.independent
        assert [r.value for r in bounds.q] == [Fraction(1, 2), Fraction(1, 2)]
        assert bounds.product_q == Fraction(1, 4)
        assert bounds.joint.value == Fraction(1, 4)
        assert "product-upper-bound-violated" not in bounds.flags

    def test_zero_projection(self):
        """A vanishing coordinate contributes q_j = 1 and a flag."""
        a = WeightVector.of([(1, 0), (2, 0)])
        bounds = q_coordinate_bounds(a, named_law("rademacher"), 0)
        assert bounds.zero_projection == [False, True]
        assert bounds.q[1].value == 1
        assert "zero-projection:2" in bounds.flags

    def test_dependent_coordinates_flagged(self):
        """Entries with two non-zero coordinates are reported as dependent."""
        a = WeightVector.of([(1, 1), (1, -1)])
        bounds = q_coordinate_bounds(a, named_law("rademacher"), 0)
        assert not bounds.independent
        assert "dependent-coordinates" in bounds.flags
        assert bounds.min_q >= bounds.joint.value

    def test_one_dimension_joint_is_the_coordinate(self):
        """For d = 1 the joint value is q_1."""
        a = WeightVector.of([1, 2, 3])
        bounds = q_coordinate_bounds(a, named_law("bernoulli"), 1)
        assert bounds.joint == bounds.q[0]
        assert np.isclose(float(bounds.min_q), float(bounds.product_q))
