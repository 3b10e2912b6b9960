"""Generalized functions: point values, seminorms, pairing, association."""

import math

import numpy as np
import pytest

from colombeau import gfunc
from colombeau.bands import Idempotent
from colombeau.domain import DomainSpec
from colombeau.errors import OrderExceeded, OutOfDomain
from colombeau.estimate import slope_fit
from colombeau.gnum import Symbolic
from colombeau.smooth import TestFunction, default_probe_suite, \
    expression_closure


@pytest.fixture(scope="module")
def dom():
    return DomainSpec(-4.0, 4.0)


@pytest.fixture(scope="module")
def probes():
    return default_probe_suite(-2.0, 2.0)


class TestPointValues:
    def test_x_delta_vanishes_at_reals(self, mol_q4, dom, grid):
        xd = gfunc.x_times_delta(mol_q4, dom, grid)
        for r in (3.0, -1.2, 0.7, 0.05):
            assert gfunc.gf_eval(xd, r).valuation() == math.inf

    def test_x_delta_on_histories(self, mol_q4, dom, grid):
        xd = gfunc.x_times_delta(mol_q4, dom, grid)
        for x0 in (0.3, -0.8, 0.95):
            v = gfunc.gf_eval(xd, Symbolic.alpha(1.0, coef=x0))
            expect = x0 * float(mol_q4(np.array([x0]))[0])
            assert np.max(np.abs(v.values - expect)) <= 1e-10

    def test_embedded_smooth_fixes_classical_values(self, dom, grid):
        f = gfunc.embed("sin(x)", dom, grid)
        v = gfunc.gf_eval(f, 1.2)
        assert np.max(np.abs(v.values - math.sin(1.2))) < 1e-15

    def test_delta_at_zero_scale(self, mol_q4, dom, grid):
        v = gfunc.gf_eval(gfunc.delta(mol_q4, dom, grid), 0.0)
        assert abs(v.valuation() + 1.0) <= 0.02

    def test_out_of_domain(self, mol_q4, grid):
        f = gfunc.delta(mol_q4, DomainSpec(-1.0, 1.0), grid)
        with pytest.raises(OutOfDomain):
            gfunc.gf_eval(f, 1.0)


class TestDerivatives:
    def test_heaviside_derivative_is_delta(self, mol_q4, dom, grid):
        H = gfunc.heaviside(mol_q4, dom, grid)
        d = gfunc.delta(mol_q4, dom, grid)
        xs = np.linspace(-0.9, 0.9, 41)
        for i in (0, 7, 20):
            assert np.max(np.abs(H.derivative(1).values(i, xs)
                                 - d.values(i, xs))) < 1e-12

    def test_x_delta_derivative_at_zero(self, mol_q4, dom, grid):
        xd = gfunc.x_times_delta(mol_q4, dom, grid)
        v = gfunc.gf_eval(xd.derivative(1), 0.0)
        assert abs(v.valuation() + 1.0) <= 0.02
        # value is rho(0)/eps exactly
        expect = mol_q4.at_zero / grid.points
        assert np.max(np.abs(v.values - expect) / expect) < 1e-12

    def test_embedded_derivative(self, dom, grid):
        f = gfunc.embed("sin(x)", dom, grid)
        xs = np.linspace(-1, 1, 11)
        assert np.max(np.abs(f.derivative(1).values(0, xs)
                             - np.cos(xs))) < 1e-12

    def test_order_cap(self, mol_q4, dom, grid):
        with pytest.raises(OrderExceeded):
            gfunc.delta(mol_q4, dom, grid).derivative(11)


class TestSeminorms:
    def test_constant_gauge_shift(self, dom, grid):
        f = gfunc.embed("sin(x)", dom, grid)
        g = f + gfunc.as_gf(1.0, dom, grid).scaled_by_number(Symbolic.alpha(3))
        sem = gfunc.seminorms(f, g, 2, 2)
        # oracle: the shift net is alpha^3 for every m, p
        assert abs(sem["V_mp"] - 3.0) < 0.05
        want = 2 * math.exp(-3) / (1 + math.exp(-3))
        assert abs(sem["D"] - want) <= 0.01 * want

    def test_identical_functions(self, dom, grid):
        f = gfunc.embed("cos(x)", dom, grid)
        assert gfunc.metric(f, f) == 0.0

    def test_distinct_smooth_at_unit_distance(self, dom, grid):
        f = gfunc.embed("sin(x)", dom, grid)
        g = gfunc.embed("cos(x)", dom, grid)
        assert abs(gfunc.metric(f, g) - 1.0) <= 0.01

    def test_delta_at_unit_distance(self, mol_q4, dom, grid):
        d = gfunc.delta(mol_q4, dom, grid)
        assert abs(gfunc.metric(d, 0.0) - 1.0) <= 0.01


class TestNeighborhoods:
    def test_gauge_small_constant(self, dom, grid):
        r = 2.0
        f = gfunc.as_gf(1.0, dom, grid).scaled_by_number(Symbolic.alpha(r + 1))
        assert gfunc.in_W(f, 0, 3, r)

    def test_x_delta_not_level_zero_small(self, mol_q4, dom, grid):
        xd = gfunc.x_times_delta(mol_q4, dom, grid)
        assert not gfunc.in_W(xd, 0, 3, 0.5)
        assert not gfunc.in_W(xd, 0, 3, 2.0)

    def test_halo_implies_association(self, dom, grid, mol_q4):
        # h with D(h, 0) < 1 built from a gauge-power envelope
        h = gfunc.embed("cos(3*x)", dom, grid).scaled_by_number(
            Symbolic.alpha(0.55))
        assert gfunc.metric(h, 0.0) < 1.0
        f = gfunc.embed("sin(x)", dom, grid)
        rep = gfunc.associate(f, f + h, default_probe_suite(-2, 2))
        assert rep.associated

    def test_image_negligible_associated_to_zero(self, dom, grid):
        f = gfunc.embed("exp(x)", dom, grid).scaled_by_number(
            Symbolic.alpha(1.0))
        rep = gfunc.associate(f, 0.0, default_probe_suite(-2, 2))
        assert rep.associated


class TestPairing:
    def test_delta_pairs_to_probe_value(self, mol_q4, dom, grid, probes):
        d = gfunc.delta(mol_q4, dom, grid)
        phi = TestFunction.bump(0.3, 1.2)
        pr = gfunc.pairing(d, phi)
        phi0 = float(phi(np.array([0.0]))[0])
        # oracle: Taylor expansion; residual order is at least Q+1
        fit = slope_fit(grid.points, pr.net.values - phi0,
                        1e-12 * np.maximum(pr.amplitude, 1.0))
        assert not math.isfinite(fit.slope) or fit.slope >= mol_q4.Q + 1

    def test_embedded_pairs_to_classical_integral(self, dom, grid):
        f = gfunc.embed("x**2", dom, grid)
        phi = TestFunction.bump(0.0, 1.0)
        pr = gfunc.pairing(f, phi)
        want = phi.integral_against(expression_closure("x**2"))
        assert np.max(np.abs(pr.net.values - want)) < 1e-10


class TestAssociation:
    def test_x_delta_associated_to_zero(self, mol_q4, dom, grid, probes):
        xd = gfunc.x_times_delta(mol_q4, dom, grid)
        rep = gfunc.associate(xd, 0.0, probes)
        assert rep.associated
        for p in rep.probes:
            assert p.vanishes or p.slope >= mol_q4.Q + 1 - 0.2

    def test_delta_not_associated(self, mol_q4, dom, grid, probes):
        rep = gfunc.associate(gfunc.delta(mol_q4, dom, grid), 0.0, probes)
        assert not rep.associated
        assert rep.min_slope() <= 0.05

    def test_x_delta_test_equivalent_to_probe_order(self, mol_q4, dom, grid,
                                                    probes):
        xd = gfunc.x_times_delta(mol_q4, dom, grid)
        rep = gfunc.test_equiv(xd, 0.0, probes, qmax=mol_q4.Q + 1)
        assert rep.associated


class TestShadows:
    def test_delta_classical(self, mol_q4, dom, grid, probes):
        rep = gfunc.shadow(gfunc.delta(mol_q4, dom, grid), probes, mol_q4)
        assert rep.kind == "classical"
        atoms = rep.descriptor["atoms"]
        assert any(a["atom"][:2] == ["delta", 0] and abs(a["coef"] - 1) < 1e-6
                   for a in atoms)

    def test_x_delta_shadow_is_zero(self, mol_q4, dom, grid, probes):
        rep = gfunc.shadow(gfunc.x_times_delta(mol_q4, dom, grid), probes,
                           mol_q4)
        assert rep.kind == "classical"
        assert all(abs(a["coef"]) < 1e-5 for a in rep.descriptor["atoms"])

    def test_masked_delta_is_vampire_with_masked_shadow(self, mol_q4, dom,
                                                        grid, probes):
        e = Idempotent.band_classes(2, [0])
        rep = gfunc.shadow(gfunc.delta(mol_q4, dom, grid).masked(e), probes,
                           mol_q4)
        assert rep.kind == "vampire"
        assert rep.masked_shadows
        atoms = rep.masked_shadows[0]["atoms"]
        assert any(a["atom"][:2] == ["delta", 0] and abs(a["coef"] - 1) < 1e-6
                   for a in atoms)


class TestModelFunctionals:
    def test_point_mass_slope_two(self, grid):
        # oracle: Taylor gives phi''(x0) eps^2 / 6 + O(eps^4)
        phi = TestFunction.bump(0.0, 1.5)
        x0 = 0.4
        pm = gfunc.point_mass(x0, phi, grid)
        fit = slope_fit(grid.points,
                        pm.values - float(phi(np.array([x0]))[0]), 1e-13)
        assert abs(fit.slope - 2.0) <= 0.1
        taylor = float(phi(np.array([x0]), 2)[0]) / 6.0
        head = (pm.values[3] - float(phi(np.array([x0]))[0])) \
            / grid.points[3] ** 2
        assert abs(head - taylor) <= 0.02 * max(1.0, abs(taylor))

    def test_dipole_slope_one(self, grid):
        phi = TestFunction.bump(0.0, 1.5)
        dp = gfunc.dipole(phi, grid)
        fit = slope_fit(grid.points,
                        dp.values - float(phi(np.array([0.0]), 1)[0]), 1e-13)
        assert abs(fit.slope - 1.0) <= 0.1
        taylor = float(phi(np.array([0.0]), 2)[0]) / 2.0
        head = (dp.values[3] - float(phi(np.array([0.0]), 1)[0])) \
            / grid.points[3]
        assert abs(head - taylor) <= 0.02 * max(1.0, abs(taylor))

    def test_dipole_exact_for_linear(self, grid):
        lin = expression_closure("0.7*x")

        class Affine:
            support = (-4, 4)
            label = "affine"

            def __call__(self, x, k=0):
                return lin(x, k)

        dp = gfunc.dipole(Affine(), grid)
        assert np.max(np.abs(dp.values - 0.7)) < 1e-12
