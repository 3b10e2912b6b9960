"""Hypernatural indices, gauge powers and convergence certificates."""

import math

import numpy as np
import pytest

from colombeau.bands import Idempotent, band_index
from colombeau.errors import NotModerate
from colombeau.gnum import Symbolic, ball_contains, sharp_dist
from colombeau.hyper import (Hypernatural, Hypersequence, alpha_pow,
                             classical_cauchy_check, hseq_limit,
                             series_converges)


class TestAlphaPow:
    def test_constant_exponent_matches_symbolic(self, grid):
        a3 = alpha_pow(Hypernatural.constant(3), grid)
        assert (a3 - Symbolic.alpha(3)).valuation() == math.inf

    def test_reciprocal_exponent_beyond_negligible(self, grid):
        n = Hypernatural(lambda e: math.floor(1.0 / e), "floor(1/eps)")
        a = alpha_pow(n, grid)
        # oracle: log-space tail slope is n_eps, far beyond the threshold
        assert a.valuation() == math.inf
        assert a.sharp_norm() == 0.0

    def test_idempotent_exponent_gives_idempotent(self, grid):
        e = Idempotent.band_classes(2, [0])
        a = alpha_pow(Hypernatural.idempotent_exponent(e), grid)
        assert np.array_equal(a.values, e.indicator(grid.points))


class TestClassicalLift:
    def test_one_over_k(self, grid):
        x = Hypersequence.classical_lift(lambda k: 1.0 / max(k, 1), grid)
        v = x.at(Hypernatural.floor_power(1.0))
        assert abs(v.valuation() - 1.0) < 0.05

    def test_constant_sequence(self, grid):
        x = Hypersequence.classical_lift(lambda k: 2.5, grid)
        v = x.at(Hypernatural.floor_power(2.0))
        assert v.valuation() == 0.0

    def test_linear_growth_with_square_index(self, grid):
        # oracle: tail slope of k(n_eps) = eps^-2 is -2
        x = Hypersequence.classical_lift(lambda k: float(k), grid)
        v = x.at(Hypernatural.floor_power(2.0))
        assert abs(v.valuation() + 2.0) < 0.1

    def test_too_fast_growth_rejected(self, grid):
        x = Hypersequence.classical_lift(lambda k: math.exp(k), grid)
        with pytest.raises(NotModerate):
            x.at(Hypernatural.floor_power(1.0))


class TestCertificates:
    def test_one_over_n_certifies_with_explicit_rule(self, grid):
        reps = hseq_limit(Hypersequence.one_over_n(grid), [1.0, 2.0, 5.0])
        for rep, r in zip(reps, (1.0, 2.0, 5.0)):
            assert rep.certified and rep.limit_is_zero
            assert rep.n0_rule == "floor(eps^-%g+1.5)" % r

    def test_geometric_certifies_with_its_formula(self, grid):
        rep = hseq_limit(Hypersequence.geometric(0.5, grid), [3.0])[0]
        assert rep.certified
        assert "ln(0.5)" in rep.n0_rule

    def test_geometric_threshold_spot_value(self):
        # t = 3, eps = e^-10: index 86 and 2^-86 below the gauge power
        c = 3.0 / abs(math.log(0.5))
        n_eps = 2 * math.floor(c * 10.0)
        assert n_eps == 86
        assert 2.0 ** -86 < math.exp(-30.0)

    def test_series_criterion(self, grid):
        assert series_converges(Hypersequence.one_over_n(grid))
        assert series_converges(Hypersequence.geometric(0.5, grid))
        const = Hypersequence.classical_lift(lambda k: 1.0, grid)
        assert not series_converges(const)

    def test_limit_uniqueness(self, grid):
        # limit estimates past both thresholds lie in the same gauge ball
        x = Hypersequence.one_over_n(grid)
        reps = hseq_limit(x, [1.0, 2.0])
        n_deep1 = Hypernatural.floor_power(2.0, 1.5).scaled(8, 5)
        n_deep2 = Hypernatural.floor_power(2.0, 1.5).scaled(16, 7)
        l1, l2 = x.at(n_deep1), x.at(n_deep2)
        for rep in reps:
            assert rep.certified
            assert ball_contains(0, rep.r, l1 - l2)


class TestClassicalFailure:
    def test_classical_sequence_pairwise_distance_one(self):
        chk = classical_cauchy_check(lambda k: 1.0 / k)
        assert chk["all_pairwise_distance_one"]
        assert all(d == 1.0 for d in chk["distances"].values())

    def test_masked_gauge_power_not_converging(self, grid):
        # witness pairs at arbitrarily deep indices keep sharp distance e^-k
        xm = Hypersequence.masked_gauge_power(2.0, grid)

        def idx(flip):
            def rule(eps):
                k = band_index(eps)
                base = round(1.0 / eps)
                return float(base if (k % 2 == 0) == flip else 3 * base)
            return Hypernatural(rule, "parity-%s" % flip)

        xa, xb = xm.at(idx(True)), xm.at(idx(False))
        assert abs(sharp_dist(xa, xb) - math.exp(-2.0)) < 1e-12
        assert not ball_contains(0, 2.0, xa - xb)
        assert ball_contains(0, 1.0, xa - xb)

    def test_index_invariance(self, grid):
        # changing the index on finitely many scales leaves a negligible
        x = Hypersequence.one_over_n(grid)
        n1 = Hypernatural.floor_power(2.0)
        n2 = Hypernatural(lambda e: n1.rule(e) + (1 if e > 0.4 else 0),
                          "head-bumped")
        d = x.at(n1) - x.at(n2)
        assert d.valuation() == math.inf
