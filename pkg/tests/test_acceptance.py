"""Acceptance gate: one test per exit criterion, at the stated tolerances.

Each test prints a PASS line; run with ``pytest tests/test_acceptance.py -v -s``.
"""

import json
import math
import os

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from colombeau import gfunc, manifolds as M
from colombeau.bands import Idempotent, band_index
from colombeau.cli import main as cli_main
from colombeau.domain import DomainSpec
from colombeau.estimate import slope_fit
from colombeau.fixpoint import (OdeProblem, dsa_check, residual_association,
                                solve_fixed_point)
from colombeau.gnum import Sampled, Symbolic, sharp_dist
from colombeau.grid import EpsilonGrid
from colombeau.hyper import (Hypernatural, Hypersequence,
                             classical_cauchy_check, hseq_limit)
from colombeau.integrate import RiemannPartition, riemann
from colombeau.membranes import (IntervalNet, boundary_classify,
                                 interleave_endpoints)
from colombeau.smooth import Mollifier, TestFunction, default_probe_suite

alpha = Symbolic.alpha
MASKS = [Idempotent.one(), Idempotent.band_classes(2, [0]),
         Idempotent.band_classes(2, [1]), Idempotent.band_classes(3, [0]),
         Idempotent.cell_classes(3, [1])]


def _random_symbolic(rng):
    terms = Symbolic.zero()
    for _ in range(rng.integers(1, 4)):
        c = float(rng.uniform(-4.0, 4.0)) or 1.0
        p = float(rng.integers(-8, 17)) / 2.0
        terms = terms + alpha(p, coef=c, mask=MASKS[rng.integers(0, len(MASKS))])
    return terms


def test_criterion_1_ultrametric(grid):
    rng = np.random.default_rng(101)
    for _ in range(500):
        x, y = _random_symbolic(rng), _random_symbolic(rng)
        assert (x + y).sharp_norm() <= max(x.sharp_norm(), y.sharp_norm())
        prod = x * y
        if prod.valuation() != math.inf:
            assert prod.valuation() >= x.valuation() + y.valuation()
    slack = math.exp(0.05)
    for _ in range(200):
        p1, p2 = rng.uniform(-3.0, 6.0, 2)
        c1, c2 = rng.uniform(-3.0, 3.0, 2)
        if c1 == 0 or c2 == 0:
            continue
        xs = (c1 * alpha(round(p1, 2))).sample(grid)
        ys = (c2 * alpha(round(p2, 2))).sample(grid)
        assert (xs + ys).sharp_norm() <= \
            max(xs.sharp_norm(), ys.sharp_norm()) * slack
        prod = xs * ys
        if prod.valuation() != math.inf:
            assert prod.valuation() >= xs.valuation() + ys.valuation() \
                - 0.05
    print("criterion 1: PASS - ultrametric + submultiplicative "
          "(500 symbolic exact, 200 sampled at e^0.05)")


def test_criterion_2_discreteness(grid, mol_q4):
    rng = np.random.default_rng(202)
    seen = set()
    count = 0
    while count < 50:
        r, s = (float(x) for x in rng.uniform(-40.0, 40.0, 2))
        if r == s or (r, s) in seen:
            continue
        seen.add((r, s))
        assert sharp_dist(r, s) == 1.0
        count += 1
    dom = DomainSpec(-4.0, 4.0)
    pairs = [("sin(x)", "cos(x)"), ("x", "x**2"), ("exp(x/4)", "1"),
             ("sin(2*x)", "sin(3*x)"), ("x**3", "x"), ("cos(x)", "1 + x**2"),
             ("x*exp(-x**2)", "2"), ("sin(x)+2", "sin(x)"),
             ("x**2+x", "x**2-1"), ("cos(x/2)", "x")]
    for fe, ge in pairs:
        D = gfunc.metric(gfunc.embed(fe, dom, grid),
                         gfunc.embed(ge, dom, grid))
        assert abs(D - 1.0) <= 0.01, (fe, ge, D)
    Dd = gfunc.metric(gfunc.delta(mol_q4, dom, grid), 0.0)
    assert abs(Dd - 1.0) <= 0.01
    print("criterion 2: PASS - discreteness (50 real pairs exact, "
          "10 smooth pairs and delta-vs-0 at D=1 within 1%%)")


def test_criterion_3_hypersequences(grid):
    reps = hseq_limit(Hypersequence.one_over_n(grid), [1.0, 2.0, 5.0])
    for rep, r in zip(reps, (1, 2, 5)):
        assert rep.certified and rep.limit_is_zero
        assert rep.n0_rule == "floor(eps^-%g+1.5)" % r
    chk = classical_cauchy_check(lambda k: 1.0 / k)
    assert chk["all_pairwise_distance_one"]
    rep_geo = hseq_limit(Hypersequence.geometric(0.5, grid), [3.0])[0]
    assert rep_geo.certified and "ln(0.5)" in rep_geo.n0_rule
    c = 3.0 / abs(math.log(0.5))
    assert 2 * math.floor(c * 10.0) == 86 and 2.0 ** -86 < math.exp(-30.0)
    print("criterion 3: PASS - (1/n) certified at the explicit thresholds, "
          "classical (1/k) fails at distance 1, (1/2)^n certified "
          "(spot: n=86, 2^-86 < e^-30)")


def test_criterion_4_association_slopes(grid, mol_q4):
    dom = DomainSpec(-4.0, 4.0)
    probes = default_probe_suite(-2.0, 2.0)
    assert len(probes) == 12
    xd = gfunc.x_times_delta(mol_q4, dom, grid)
    rep = gfunc.associate(xd, 0.0, probes)
    assert rep.associated
    for p in rep.probes:
        assert p.vanishes or p.slope >= 5.0 - 0.2, p
    phi = TestFunction.bump(0.0, 1.5)
    dp = gfunc.dipole(phi, grid)
    fit_d = slope_fit(grid.points,
                      dp.values - float(phi(np.array([0.0]), 1)[0]), 1e-13)
    assert abs(fit_d.slope - 1.0) <= 0.1
    pm = gfunc.point_mass(0.4, phi, grid)
    fit_p = slope_fit(grid.points,
                      pm.values - float(phi(np.array([0.4]))[0]), 1e-13)
    assert abs(fit_p.slope - 2.0) <= 0.1
    repd = gfunc.associate(gfunc.delta(mol_q4, dom, grid), 0.0, probes)
    assert not repd.associated
    assert repd.min_slope() <= 0.05
    print("criterion 4: PASS - x*delta slopes >= 4.8 on all 12 probes, "
          "dipole 1 +- 0.1, point mass 2 +- 0.1, delta not associated")


def test_criterion_5_point_values(grid, mol_q4):
    dom = DomainSpec(-4.0, 4.0)
    xd = gfunc.x_times_delta(mol_q4, dom, grid)
    rng = np.random.default_rng(505)
    for _ in range(20):
        r = float(rng.uniform(-3.8, 3.8))
        if abs(r) < 1e-3:
            continue
        assert gfunc.gf_eval(xd, r).valuation() == math.inf
    for x0 in np.linspace(-0.95, 0.95, 10):
        v = gfunc.gf_eval(xd, alpha(1.0, coef=float(x0)))
        expect = float(x0) * float(mol_q4(np.array([x0]))[0])
        assert np.max(np.abs(v.values - expect)) <= 1e-10
    vp = gfunc.gf_eval(xd.derivative(1), 0.0)
    assert abs(vp.valuation() + 1.0) <= 0.02
    print("criterion 5: PASS - x*delta vanishes at 20 reals, history values "
          "exact to 1e-10 at 10 points, derivative scale -1 +- 0.02")


def test_criterion_6_riemann(grid, mol_q4):
    dom = DomainSpec(-1.6, 1.6)
    targets = {"1": 2.0, "x": 0.0, "x**2": 2.0 / 3.0, "delta": 1.0}
    meshes = [1.0, 3.0, Hypernatural.floor_power(2.0)]
    length = 2.0
    for name, integral in targets.items():
        f = gfunc.delta(mol_q4, dom, grid) if name == "delta" \
            else gfunc.embed(name, dom, grid)
        for mesh in meshes:
            res = riemann(f, RiemannPartition(-1.0, 1.0, 4, mesh))
            assert res["sandwich_ok"], (name, mesh)
            assert res["bound_ok"], (name, mesh)
            assert np.all(res["s"].values <= integral + 1e-9)
            assert np.all(res["S"].values >= integral - 1e-9)
            # mean value point located per scale
            for i in (0, 20, 47):
                c = res["c_mean"].values[i]
                fc = float(f.values(i, np.array([c]), 0)[0]) * length
                lo = res["s"].values[i] - 1e-6 * (1 + abs(integral))
                hi = res["S"].values[i] + 1e-6 * (1 + abs(integral))
                assert lo <= fc <= hi, (name, mesh, i)
    print("criterion 6: PASS - 12 integrand/mesh combinations: sandwich, "
          "gradient bound, integral bracketing, mean-value points")


@pytest.fixture(scope="module")
def sin_solution(grid, mol_q4):
    problem = OdeProblem("sin(x)", "0", 0.3, 0.0, b=1.0, mol=mol_q4,
                         grid=grid)
    return problem, solve_fixed_point(problem, r_target=10.0)


def test_criterion_7_fixed_point(grid, mol_q4, sin_solution):
    # trivial force: one iterate to the closed form
    p0 = OdeProblem("0", "t", 0.25, -0.5, b=1.0, mol=mol_q4, grid=grid)
    res0 = solve_fixed_point(p0, r_target=6.0)
    assert all(ch[1] == 0.0 for ch in res0["certificate"].sup_changes)
    for i in range(len(grid)):
        ts = p0.lattices[i].x
        closed = 0.25 - 0.5 * (ts + 1.0) \
            + ((ts ** 3 / 3.0 - ts) - (2.0 / 3.0)) / 2.0
        assert np.max(np.abs(res0["states"][i] - closed)) <= 1e-12

    problem, res = sin_solution
    cert = res["certificate"]
    worst = 0.0
    for i in range(len(grid)):
        e = grid.points[i]
        R = problem.mol.R

        def rhs(z, y):
            return [e * y[1],
                    math.sin(y[0]) * float(problem.mol(np.array([z]))[0])]

        sol = solve_ivp(rhs, (-R, R), [0.3, 0.0], rtol=1e-12, atol=1e-14,
                        dense_output=True, max_step=0.05)
        xR, vR = sol.y[0, -1], sol.y[1, -1]
        ts = problem.lattices[i].x
        oracle = np.where(ts <= -R * e, 0.3,
                          np.where(ts >= R * e, xR + vR * (ts - R * e), 0.0))
        inside = (ts > -R * e) & (ts < R * e)
        if inside.any():
            oracle[inside] = sol.sol(ts[inside] / e)[0]
        worst = max(worst, float(np.max(np.abs(res["states"][i] - oracle))))
    assert worst <= 1e-9
    assert cert.measured_rate <= 0.5 and cert.rate_ok
    res2 = solve_fixed_point(problem, r_target=10.0,
                             start_offset=0.5 * problem.L)
    D = gfunc.metric(res["solution"], res2["solution"])
    assert D < math.exp(-8.0)
    rep = residual_association(problem, res["solution"])
    assert rep.associated
    assert all(pr.vanishes or pr.slope >= 0.5 for pr in rep.probes)
    assert len(res["dsa_differences"]) == 3
    for F in res["dsa_differences"]:
        out = dsa_check(F, m=3, r=8.0, p0=1)
        assert out["applicable"] and out["passed"]
    print("criterion 7: PASS - trivial force exact in one iterate, sin case "
          "matches the classical oracle to %.1e, rate %.3f <= 0.5, "
          "uniqueness D = %.2e < e^-8, residual slopes >= 0.5, DSA x3"
          % (worst, cert.measured_rate, D))


def test_criterion_8_membranes(grid):
    unit = IntervalNet(Symbolic.constant(0.0), Symbolic.constant(1.0))
    gm = EpsilonGrid.geometric(0.4, 0.5, 48)
    moving = IntervalNet(alpha(1), Symbolic.constant(1.0) - alpha(1))
    cases = []
    rng = np.random.default_rng(808)
    for _ in range(9):
        x = float(rng.uniform(0.05, 0.95))
        cases.append((unit, grid, x, "Interior"))
    for x in (-0.4, 1.3, -0.01, 1.01, 2.5):
        cases.append((unit, grid, x, "Exterior"))
    for p in (0.0, 1.0):
        cases.append((unit, grid, p, "Boundary"))
    cases += [(unit, grid, 0.5 + alpha(1), "Interior"),
              (unit, grid, alpha(1), "Interior"),
              (unit, grid, -alpha(1), "Exterior"),
              (unit, grid, Symbolic.constant(1.0) + alpha(1), "Exterior"),
              (moving, gm, alpha(1), "Boundary"),
              (moving, gm, 2.0 * alpha(1), "Interior"),
              (moving, gm, 0.5, "Interior"),
              (moving, gm, 0.0, "Exterior"),
              (moving, gm, -0.3, "Exterior"),
              (moving, gm, Symbolic.constant(1.0) - alpha(1), "Boundary"),
              (moving, gm, Symbolic.constant(1.0), "Boundary"),
              (moving, gm, 0.25, "Interior"),
              (moving, gm, 1.4, "Exterior"),
              (moving, gm, 3.0 * alpha(1), "Interior")]
    assert len(cases) >= 30
    for net, g, p, want in cases:
        got = boundary_classify(p, net, g)["kind"]
        assert got == want, (p, want, got)
    for e in (Idempotent.band_classes(2, [0]), Idempotent.band_classes(3, [2])):
        for net, g in ((unit, grid), (moving, gm)):
            p = interleave_endpoints(net, e, g)
            assert boundary_classify(p, net, g)["kind"] == "Boundary"
    print("criterion 8: PASS - 30-point trichotomy matches hand "
          "classification; interleaved endpoints classify Boundary")


def test_criterion_9_manifolds():
    spec = M.CircleSpec(1.0)
    mgrid = M.manifold_grid()
    p = M.GeneralizedPoint.on_circle(spec, mgrid, lambda e: 1.0 / e)
    supp = M.support(p)
    hd = M.support_hausdorff(supp, spec.classical_sample(720))
    assert hd <= 0.05
    frc = M.assign_chart(p, spec)
    assert 2 <= len(frc.range_indices()) <= 4
    assert np.all(frc.margins(p) > 0.5 * frc.delta - 1e-12)

    gm = EpsilonGrid.geometric(0.5, 0.8, 48)
    rng = np.random.default_rng(909)
    checked = 0
    while checked < 100:
        th = float(rng.uniform(0.0, 2.0 * math.pi))
        kind = checked % 4
        if kind == 0:
            ang2 = (lambda t: (lambda e: t))(float(rng.uniform(0, 2 * math.pi)))
        else:
            c = float(rng.uniform(0.2, 1.5))
            k = float(kind)
            ang2 = (lambda t, cc, kk: (lambda e: t + cc * e ** kk))(th, c, kind)
        pa = M.GeneralizedPoint.on_circle(spec, gm, lambda e: th)
        pb = M.GeneralizedPoint.on_circle(spec, gm, ang2)
        try:
            frc_p = M.assign_chart(pa, spec)
            chk = M.isometry_check(frc_p, pa, pb)
        except Exception:
            continue
        assert chk["ok"], chk
        checked += 1

    # transitions over all chart pairs along a wandering point
    pw = M.GeneralizedPoint.on_circle(spec, gm,
                                      lambda e: math.pi / 4 + 0.05 * e)
    n = len(gm)
    for i1 in (0, 1):
        for i2 in (0, 1):
            c1 = M.FiniteRangeChart(spec, np.full(n, i1, dtype=int),
                                    pw.values[:1], 0.5)
            c2 = M.FiniteRangeChart(spec, np.full(n, i2, dtype=int),
                                    pw.values[:1], 0.5)
            tr = M.transition_check(c1, c2, pw)
            assert tr["det_unit"], (i1, i2)
    probes = [M.GeneralizedPoint(gm, np.tile(np.array([0.6, 0.8]),
                                             (len(gm), 1)))]
    rv = M.regular_value_check(lambda x: float(x @ x), lambda x: 2.0 * x,
                               1.0, probes, gm)
    assert rv["regular"] and rv["probes"][0]["value"] == 4.0
    print("criterion 9: PASS - supp Hausdorff %.3f <= 0.05, finite-range "
          "charts with the half-Lebesgue margin, 100 isometry pairs, "
          "transition determinants unit, |grad|^2 = 4 exactly" % hd)


def test_criterion_10_cli_determinism(tmp_path):
    problem = tmp_path / "p.json"
    problem.write_text(json.dumps(
        {"f": "0", "h": "t", "x0": 0.25, "x0dot": -0.5, "b": 1.0,
         "Q": 4, "r_target": 6}))
    commands = [
        ["norm", "--expr", "alpha^2 + 3*alpha^5"],
        ["hseq", "--rule", "1/n", "--r", "1,2"],
        ["density", "--family", "6"],
        ["associate", "--left", "xdelta", "--right", "zero"],
        ["shadow", "--target", "delta"],
        ["riemann", "--f", "x2", "--mesh", "alpha^3"],
        ["ode", "--problem", str(problem)],
        ["membrane", "--spec",
         '{"a": "0", "b": "1", "probes": ["0.5", "0", "-0.3"]}'],
        ["manifold-demo"],
    ]
    for idx, args in enumerate(commands):
        d1 = tmp_path / ("a%d" % idx)
        d2 = tmp_path / ("b%d" % idx)
        assert cli_main(["--out", str(d1)] + args) == 0, args
        assert cli_main(["--out", str(d2)] + args) == 0, args
        files1 = sorted(os.listdir(d1))
        assert files1 == sorted(os.listdir(d2))
        for f in files1:
            b1 = (d1 / f).read_bytes()
            b2 = (d2 / f).read_bytes()
            assert b1 == b2, (args, f)
    print("criterion 10: PASS - all 9 subcommands byte-identical on rerun")
