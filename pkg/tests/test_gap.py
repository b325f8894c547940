#!/usr/bin/env python3
"""
Tests for GAP enumeration, coverage and the beta infimum.
"""

import math
from fractions import Fraction

import pytest

from smallball.dist import levy_base_measure, measure_from_points, named_law
from smallball.exceptions import GapCapExceeded, InvalidParameterError, UnsupportedRankError
from smallball.gap import (
    beta,
    beta_bound,
    beta_oracle,
    coverage,
    gap_distance,
    gap_points,
    k1_construct,
    measure_outside,
    product_k1,
)
from smallball.models.dist import WeightVector
from smallball.models.gap import GAPFamily, Norm, PointSetRegion, SymmetricGAP
from smallball.models.reports import InequalityId


def gap(generators, limits) -> SymmetricGAP:
    return SymmetricGAP.model_validate({"generators": generators, "limits": limits})


class TestGapPoints:
    """Tests for enumerating K."""

    def test_rank_two_interval(self):
        """Generators 1 and 2 with unit limits fill -3..3."""
        assert gap_points(gap([1, 2], [1, 1])) == [(x,) for x in range(-3, 4)]

    def test_collisions_shrink_the_set(self):
        """|K| can be smaller than Vol(K)."""
        K = gap([1, 1], [1, 1])
        assert K.volume == 9
        assert len(gap_points(K)) == 5

    def test_fractional_limits_floor(self):
        """Only floor(L) matters."""
        K = gap([2], [Fraction(3, 2)])
        assert K.volume == 3
        assert gap_points(K) == [(-2,), (0,), (2,)]

    def test_symmetric(self):
        """K = -K."""
        points = set(gap_points(gap([(1, 2), (3, -1)], [2, 1])))
        assert points == {tuple(-x for x in p) for p in points}

    def test_cap(self):
        """Enumeration refuses volumes above the cap."""
        with pytest.raises(GapCapExceeded):
            gap_points(gap([1], [10]), cap=5)

    def test_family_membership(self):
        """The family bounds rank and volume."""
        family = GAPFamily(rank_cap=2, volume_cap=15)
        assert gap([1, 5], [1, 2]) in family
        assert gap([1, 5], [2, 2]) not in family


class TestK1:
    """Tests for K_1(u) and coordinate products."""

    def test_volume_is_power_of_three(self):
        """K_1(u) has volume 3^r."""
        for r in range(1, 5):
            assert k1_construct(list(range(1, r + 1))).volume == 3 ** r

    def test_points(self):
        """K_1((1, 3)) is -4..4."""
        assert gap_points(k1_construct([1, 3])) == [(x,) for x in range(-4, 5)]

    def test_empty_rejected(self):
        """At least one generator is needed."""
        with pytest.raises(InvalidParameterError):
            k1_construct([])

    def test_product_rank_and_embedding(self):
        """Block generators land on their own axes; empty blocks add no rank."""
        region = product_k1([[1], [2, 5]], [0, Fraction(1, 2)])
        assert region.rank == 3
        assert region.d == 2
        assert region.combined.generators == ((1, 0), (0, 2), (0, 5))
        assert product_k1([[], [1]], [0, 0]).rank == 1

    def test_product_mismatch(self):
        """One delta per block."""
        with pytest.raises(InvalidParameterError):
            product_k1([[1], [2]], [0])


class TestCoverage:
    """Tests for closed-neighborhood coverage."""

    def test_tolerance_example(self):
        """a = (1, 2, 2.05) against K(1; 3)."""
        a = WeightVector.of([1, 2, 2.05])
        K = gap([1], [3])
        wide = coverage(a, K, 0.1)
        assert wide.covered_count == 3
        assert wide.uncovered_indices == []
        narrow = coverage(a, K, 0.01)
        assert narrow.covered_count == 2
        assert narrow.uncovered_indices == [3]

    def test_boundary_is_inside(self):
        """A point at distance exactly tol is covered."""
        a = WeightVector.of([Fraction(7, 2)])
        assert coverage(a, gap([1], [3]), Fraction(1, 2)).covered_count == 1
        assert coverage(a, gap([1], [3]), Fraction(49, 100)).covered_count == 0

    def test_norms_differ(self):
        """The euclidean neighborhood is smaller than the max-norm one."""
        a = WeightVector.of([(3, 4)])
        origin = PointSetRegion(d=2, points=[(0, 0)])
        assert coverage(a, origin, Fraction(9, 2), Norm.MAX).covered_count == 1
        assert coverage(a, origin, Fraction(9, 2), Norm.EUCLIDEAN).covered_count == 0
        assert coverage(a, origin, 5, Norm.EUCLIDEAN).covered_count == 1

    def test_rank_two_region(self):
        """Rank two GAPs are enumerated."""
        a = WeightVector.of([7, -6, 100])
        report = coverage(a, gap([1, 5], [2, 1]), 0)
        assert report.covered_count == 2
        assert report.uncovered_indices == [3]

    def test_product_region(self):
        """Each coordinate uses its own delta."""
        region = product_k1([[1], [1]], [0, 0])
        a = WeightVector.of([(1, -1), (2, 0)])
        assert coverage(a, region, 0).uncovered_indices == [2]
        widened = product_k1([[1], [1]], [1, 0])
        assert coverage(a, widened, 0).covered_count == 2

    def test_errors(self):
        """Negative tolerance and dimension mismatch are rejected."""
        a = WeightVector.of([1, 2])
        with pytest.raises(InvalidParameterError):
            coverage(a, gap([1], [1]), -1)
        with pytest.raises(InvalidParameterError):
            coverage(a, gap([(1, 0)], [1]), 0)


class TestDistance:
    """Tests for gap_distance and measure_outside."""

    def test_scalar_distance(self):
        """Distances to a rank-one progression on the line."""
        K = gap([1], [3])
        assert gap_distance(Fraction(7, 2), K) == Fraction(1, 2)
        assert gap_distance(10, K) == 7

    def test_planar_rank_one(self):
        """(3, 4) is at distance 4 from the multiples of (1, 0)."""
        K = gap([(1, 0)], [5])
        assert gap_distance((3, 4), K) == 4
        assert gap_distance((3, 4), K, Norm.EUCLIDEAN) == pytest.approx(4.0)

    def test_point_list_region(self):
        """A plain list of points is accepted."""
        assert gap_distance(5, [1, 2, 8]) == 3

    def test_measure_outside(self):
        """Only atoms beyond the neighborhood count."""
        W = measure_from_points([1, 2, 5])
        K = gap([1], [2])
        assert measure_outside(W, K) == 1
        assert measure_outside(W, K, 3) == 0


class TestBeta:
    """Tests for beta_{r,m}(W, tau)."""

    @pytest.mark.parametrize("r,m,tau", [(1, 3, 0), (1, 5, 0), (2, 9, 0), (2, 15, 0), (1, 3, Fraction(1, 2)),
                                         (2, 9, Fraction(1, 2))])
    def test_matches_oracle(self, r, m, tau):
        """The search equals brute force on small exhaustive instances."""
        W = levy_base_measure(WeightVector.of([1, 2, 5]))
        result = beta(W, r, m, tau, depth=2)
        assert result.exhaustive
        assert result.value == beta_oracle(W, r, m, tau, depth=2)

    def test_oracle_on_scaled_measure(self):
        """Masses scale the value linearly."""
        W = levy_base_measure(WeightVector.of([1, 3, 4, 11])).scaled(Fraction(1, 8))
        assert beta(W, 2, 9, 0, depth=2).value == beta_oracle(W, 2, 9, 0, depth=2)

    def test_witness_achieves_value(self):
        """The witness is a family member leaving exactly the reported mass outside."""
        W = levy_base_measure(WeightVector.of([1, 2, 7, 9]))
        result = beta(W, 2, 15, 0, depth=3)
        assert result.witness in GAPFamily(rank_cap=2, volume_cap=15)
        assert measure_outside(W, result.witness, 0) == result.value

    def test_monotone(self):
        """beta does not increase with r, m or tau."""
        W = levy_base_measure(WeightVector.of([1, 3, 8, 13]))
        assert beta(W, 2, 9, 0, depth=2).value <= beta(W, 1, 9, 0, depth=2).value
        assert beta(W, 1, 9, 0, depth=2).value <= beta(W, 1, 3, 0, depth=2).value
        assert beta(W, 1, 3, 1, depth=2).value <= beta(W, 1, 3, 0, depth=2).value

    def test_errors(self):
        """Rank above the supported maximum and planar measures are rejected."""
        W = levy_base_measure(WeightVector.of([1, 2]))
        with pytest.raises(UnsupportedRankError):
            beta(W, 5, 243)
        with pytest.raises(UnsupportedRankError):
            beta_oracle(W, 3, 27)
        with pytest.raises(InvalidParameterError):
            beta(W, 0, 3)
        with pytest.raises(InvalidParameterError):
            beta(levy_base_measure(WeightVector.of([(1, 2)])), 1, 3)


class TestBetaBound:
    """Tests for the concentration bound through beta."""

    def test_spread_weights(self):
        """a = (1, 10, 100): one pair fits in a volume-3 progression."""
        a = WeightVector.of([1, 10, 100])
        report = beta_bound(a, named_law("rademacher"), 0, 1, Fraction(1, 2), r=1, m=3)
        assert report.inequality_id == InequalityId.BETA_BOUND
        assert report.lhs == Fraction(1, 8)
        assert report.extras["p"] == Fraction(1, 2)
        assert report.extras["factor"] == 2
        assert report.extras["beta"] == Fraction(1, 2)
        expected = 2 * (1 / (3 * math.sqrt(0.5)) + 0.5 ** -1)
        assert report.rhs_unconstanted == pytest.approx(expected)
        assert not report.vacuous

    def test_structured_weights_are_vacuous(self):
        """All-equal weights are covered entirely, so beta is zero."""
        report = beta_bound(WeightVector.of([1] * 6), named_law("rademacher"), 0, 1, 1, r=1, m=3)
        assert report.vacuous
        assert "beta-zero" in report.flags

    def test_point_law_is_vacuous(self):
        """A degenerate law has p = 0."""
        report = beta_bound(WeightVector.of([1, 2]), named_law("point"), 0, 1, 1, r=1, m=3)
        assert report.vacuous
        assert "p-zero" in report.flags
