"""Ring, order, valuation and classification of generalized numbers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from colombeau.bands import Idempotent
from colombeau.errors import NotAUnit, NotModerate
from colombeau.gnum import (Classification, Order, Sampled, Symbolic,
                            annihilator, ball_contains, classify, compare,
                            interleave, invert, sharp_dist)
from colombeau.grid import EpsilonGrid

alpha = Symbolic.alpha
PARITY = Idempotent.band_classes(2, [0])


class TestValuation:
    def test_alpha_power_exact(self):
        assert alpha(2).valuation() == 2.0

    def test_constant_is_scale_zero(self):
        # nonzero reals sit on the unit sphere
        assert Symbolic.constant(7.0).valuation() == 0.0
        assert Symbolic.constant(7.0).sharp_norm() == 1.0

    def test_sampled_constant_exact_zero(self, grid):
        s = Symbolic.constant(7.0).sample(grid)
        assert s.valuation() == 0.0

    def test_masked_monomial(self, grid):
        x = alpha(3, mask=PARITY)
        assert x.valuation() == 3.0
        assert abs(x.sample(grid).valuation() - 3.0) < 1e-9

    def test_masked_monomial_fine_oracle(self):
        # oracle: direct tail infimum of log_eps|x| on a 1e6-point refinement
        e = PARITY
        eps = np.geomspace(1.0 - 1e-9, 1e-12, 1_000_000)
        ind = e.indicator_fast(eps)
        vals = ind * eps ** 3
        keep = vals > 0
        inf_slope = np.min(np.log(vals[keep]) / np.log(eps[keep]))
        assert abs(inf_slope - 3.0) < 1e-6

    def test_non_moderate_rejected(self, grid):
        with pytest.raises(NotModerate):
            Sampled(grid, np.exp(1.0 / grid.points))

    def test_underflow_logs(self, grid):
        assert abs(alpha(30).sample(grid).valuation() - 30.0) < 1e-9
        assert alpha(50).sample(grid).valuation() == math.inf


class TestRingOps:
    def test_cancellation(self):
        assert (alpha(1) - alpha(1)).valuation() == math.inf

    def test_exponent_addition(self):
        z = alpha(2) * alpha(3)
        assert (z - alpha(5)).valuation() == math.inf

    def test_cross_mask_cancellation(self):
        z = alpha(1) - alpha(1, mask=PARITY) \
            - alpha(1, mask=PARITY.complement())
        assert z.valuation() == math.inf

    def test_two_cell_sum(self, grid):
        x = alpha(1, mask=PARITY) + alpha(2, mask=PARITY.complement())
        assert x.valuation() == 1.0
        # oracle: pointwise evaluation
        s = x.sample(grid)
        ind = PARITY.indicator(grid.points)
        expect = np.where(ind > 0, grid.points, grid.points ** 2)
        assert np.max(np.abs(s.values - expect)) < 1e-15

    def test_promotion_alignment(self, grid):
        s = alpha(1).sample(grid) + alpha(2)
        assert abs(s.valuation() - 1.0) < 1e-9


class TestClassify:
    def test_units_and_zero_divisors(self):
        assert classify(alpha(5)) is Classification.UNIT
        x = alpha(1, mask=PARITY)
        assert classify(x) is Classification.ZERO_DIVISOR
        ann = annihilator(x)
        assert ann is not None and (ann * PARITY).is_zero()
        assert classify(Symbolic.zero()) is Classification.ZERO

    @pytest.mark.parametrize("n", [1, 3, 7])
    def test_paper_family_units(self, n):
        # x_n = e - (1-e) a^n is a unit with |x_n| = e + (1-e) a^n
        e = PARITY
        x = Symbolic.from_mask(e) - alpha(float(n), mask=e.complement())
        assert classify(x) is Classification.UNIT
        want = Symbolic.from_mask(e) + alpha(float(n), mask=e.complement())
        assert (x.abs() - want).valuation() == math.inf

    def test_dichotomy_random_symbolic(self):
        rng = np.random.default_rng(5)
        masks = [Idempotent.one(), PARITY, PARITY.complement(),
                 Idempotent.cell_classes(3, [0])]
        for _ in range(60):
            terms = []
            for _t in range(rng.integers(1, 4)):
                c = float(rng.choice([-2.0, -1.0, 1.0, 3.0]))
                p = float(rng.integers(-2, 5))
                terms.append((c, p, masks[rng.integers(0, len(masks))]))
            x = sum((alpha(p, coef=c, mask=m) for c, p, m in terms),
                    Symbolic.zero())
            kind = classify(x)
            if x.valuation() == math.inf:
                assert kind is Classification.ZERO
            else:
                assert kind in (Classification.UNIT,
                                Classification.ZERO_DIVISOR)


class TestInvert:
    def test_monomial(self):
        assert ((invert(alpha(1)) * alpha(1)) - 1).valuation() == math.inf
        assert invert(Symbolic.constant(2.0)) == 0.5

    def test_per_cell_monomials(self):
        y = alpha(1, mask=PARITY) + alpha(2, mask=PARITY.complement())
        yi = invert(y)
        assert ((y * yi) - 1).valuation() == math.inf
        want = alpha(-1, mask=PARITY) + alpha(-2, mask=PARITY.complement())
        assert (yi - want).valuation() == math.inf
        # oracle: pointwise reciprocal (relative, values span many decades)
        g = EpsilonGrid.default()
        got = yi.sample(g).values
        want = 1.0 / y.sample(g).values
        assert np.max(np.abs(got - want) / np.abs(want)) < 1e-12

    def test_not_a_unit(self):
        with pytest.raises(NotAUnit):
            invert(alpha(1, mask=PARITY))

    def test_non_monomial_falls_back_to_sampled(self, grid):
        y = Symbolic.constant(1.0) + alpha(1)
        yi = invert(y, grid)
        assert isinstance(yi, Sampled)
        prod = yi * y.sample(grid)
        assert (prod - 1).valuation() == math.inf


class TestOrder:
    def test_basic(self):
        assert compare(alpha(1), alpha(2)) is Order.GT
        assert compare(alpha(3, mask=PARITY), alpha(3, mask=PARITY)) is Order.EQ

    def test_incomparable_sign_split(self, grid):
        osc = alpha(1, mask=PARITY) - alpha(1, mask=PARITY.complement())
        assert compare(osc, 0) is Order.INCOMPARABLE
        # oracle: tail sample signs differ between band classes
        s = osc.sample(grid)
        tail = s.values[grid.tail_slice()]
        assert (tail > 0).any() and (tail < 0).any()

    def test_sampled_compare(self, grid):
        a = alpha(1).sample(grid)
        b = alpha(2).sample(grid)
        assert compare(a, b) is Order.GT
        assert compare(b, a) is Order.LT
        assert compare(a, a) is Order.EQ


class TestBalls:
    def test_strict_boundary(self):
        assert ball_contains(0, 2, alpha(3))
        assert not ball_contains(0, 2, alpha(2))

    def test_strict_boundary_sampled(self, grid):
        zero = Symbolic.zero().sample(grid)
        assert ball_contains(zero, 2, alpha(3).sample(grid))
        assert not ball_contains(zero, 2, alpha(2).sample(grid))

    def test_order_members_of_gauge_balls(self):
        # |y| < alpha^2 can hold at scale exponent exactly 2
        y = alpha(2) - alpha(5)
        assert ball_contains(0, 2, y)

    def test_ball_sandwich(self, grid):
        # metric balls bracket gauge balls: B_{2r} in V_r in B_{r/2}
        r = 4.0
        rng = np.random.default_rng(11)
        for _ in range(25):
            p = rng.uniform(0.2, 12.0)
            c = rng.choice([-3.0, 0.5, 2.0])
            y = alpha(round(p, 3), coef=float(c))
            in_b2r = y.sharp_norm() < math.exp(-2 * r)
            in_vr = ball_contains(0, r, y)
            in_br2 = y.sharp_norm() < math.exp(-r / 2)
            if in_b2r:
                assert in_vr
            if in_vr:
                assert in_br2


class TestInterleaving:
    def test_single_part(self):
        z = interleave([(Idempotent.one(), alpha(2))])
        assert (z - alpha(2)).valuation() == math.inf

    def test_dice_entertwine(self):
        dice = Idempotent.family(6)
        z = interleave([(dice[i], float(i + 1)) for i in range(6)])
        for i in range(6):
            lhs = z * Symbolic.from_mask(dice[i])
            rhs = Symbolic.constant(float(i + 1)) * Symbolic.from_mask(dice[i])
            assert (lhs - rhs).valuation() == math.inf

    def test_sign_split_squares_to_one(self):
        # oracle: pointwise arithmetic
        pm = interleave([(PARITY, 1.0), (PARITY.complement(), -1.0)])
        assert ((pm * pm) - 1).valuation() == math.inf
        g = EpsilonGrid.default()
        assert np.max(np.abs((pm * pm).sample(g).values - 1.0)) < 1e-15


class TestMetricProperties:
    def test_discreteness_of_reals(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            r, s = rng.uniform(-50, 50, 2)
            if r != s:
                assert sharp_dist(r, s) == 1.0

    def test_scaling_insensitivity_symbolic(self):
        assert (1000.0 * alpha(2)).sharp_norm() == alpha(2).sharp_norm()

    @settings(max_examples=120, deadline=None)
    @given(p=st.integers(-3, 8), q=st.integers(-3, 8),
           c=st.sampled_from([-3.0, -1.0, 0.5, 2.0]),
           d=st.sampled_from([-2.0, 1.0, 4.0]),
           m1=st.integers(0, 2), m2=st.integers(0, 2))
    def test_ultrametric_and_products_symbolic(self, p, q, c, d, m1, m2):
        masks = [Idempotent.one(), PARITY, PARITY.complement()]
        x = alpha(float(p), coef=c, mask=masks[m1])
        y = alpha(float(q), coef=d, mask=masks[m2])
        s = x + y
        assert s.sharp_norm() <= max(x.sharp_norm(), y.sharp_norm())
        prod = x * y
        if prod.valuation() != math.inf:
            assert prod.valuation() >= x.valuation() + y.valuation() - 1e-12

    def test_positive_invertible_segments(self):
        # convex combinations of positive units stay positive units
        rng = np.random.default_rng(9)
        e = PARITY
        for _ in range(40):
            p1, p2 = rng.integers(-2, 4, 2)
            x = alpha(float(p1), coef=2.0, mask=e) \
                + alpha(float(p2), coef=1.0, mask=e.complement())
            y = Symbolic.constant(float(rng.uniform(0.5, 3.0)))
            t = float(rng.uniform(0.0, 1.0))
            z = t * x + (1.0 - t) * y
            assert classify(z) is Classification.UNIT
            assert compare(z, 0) is Order.GT
