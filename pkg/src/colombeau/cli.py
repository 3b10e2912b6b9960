"""Command-line surface: reproducible experiment runners.

Every subcommand reads one JSON config (grid, mollifier, probes,
tolerances, seed), writes JSON reports plus CSV nets under --out, and is
byte-deterministic: running twice with the same inputs produces identical
artifacts.  Exit codes: 0 ok, 2 config error, 3 computation error,
4 certification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import gfunc, manifolds
from .bands import Idempotent, density
from .config import RunConfig, parallel_map
from .domain import DomainSpec
from .errors import ColombeauError, ConfigError
from .exprs import eval_scale_expression
from .fixpoint import OdeProblem, dsa_check, residual_association, \
    solve_fixed_point
from .gnum import Sampled, Symbolic, classify
from .hyper import Hypernatural, Hypersequence, classical_cauchy_check, \
    hseq_limit
from .integrate import RiemannPartition, riemann
from .membranes import IntervalNet, boundary_classify, interleave_endpoints
from .reports import error_report, write_json_report, write_net_csv
from .smooth import Mollifier, default_probe_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_CERTIFY = 4


def _out(cfg: RunConfig, args) -> str:
    return args.out or cfg.out_dir


def cmd_norm(cfg: RunConfig, args) -> int:
    value = eval_scale_expression(args.expr)
    grid = cfg.grid()
    sampled = value.sample(grid) if isinstance(value, Symbolic) else value
    payload = {
        "expr": args.expr,
        "valuation": value.valuation(),
        "sharp_norm": value.sharp_norm(),
        "classification": classify(value).value,
        "sampled_valuation": sampled.valuation(),
    }
    out = _out(cfg, args)
    write_json_report(os.path.join(out, "norm.json"), payload, cfg.stamp())
    write_net_csv(os.path.join(out, "norm_net.csv"), grid, sampled.values)
    return EXIT_OK


def cmd_hseq(cfg: RunConfig, args) -> int:
    grid = cfg.grid()
    radii = [float(r) for r in args.r.split(",")]
    if args.rule == "1/n":
        seq = Hypersequence.one_over_n(grid)
    elif args.rule.startswith("geometric"):
        ratio = float(args.rule.split(":")[1]) if ":" in args.rule else 0.5
        seq = Hypersequence.geometric(ratio, grid)
    elif args.rule == "classical-1/k":
        chk = classical_cauchy_check(lambda k: 1.0 / k)
        write_json_report(os.path.join(_out(cfg, args), "hseq.json"),
                          {"rule": args.rule, "classical": chk}, cfg.stamp())
        return EXIT_OK
    else:
        raise ConfigError("unknown rule %r" % args.rule)
    reports = hseq_limit(seq, radii)
    payload = {"rule": args.rule, "radii": [rep.to_json() for rep in reports]}
    write_json_report(os.path.join(_out(cfg, args), "hseq.json"), payload,
                      cfg.stamp())
    return EXIT_OK if all(rep.certified for rep in reports) else EXIT_CERTIFY


def cmd_density(cfg: RunConfig, args) -> int:
    if args.family:
        fam = Idempotent.family(int(args.family))
        rows = [density(e) for e in fam]
        payload = {"family": int(args.family),
                   "members": rows,
                   "total": sum(r["value"] for r in rows)}
    else:
        e = Idempotent.from_spec(json.loads(args.spec))
        payload = {"spec": json.loads(args.spec), "density": density(e)}
    write_json_report(os.path.join(_out(cfg, args), "density.json"), payload,
                      cfg.stamp())
    return EXIT_OK


def _build_target(name: str, cfg: RunConfig, dom: DomainSpec, grid, mol):
    if name == "zero":
        return gfunc.as_gf(0.0, dom, grid)
    if name == "delta":
        return gfunc.delta(mol, dom, grid)
    if name == "xdelta":
        return gfunc.x_times_delta(mol, dom, grid)
    if name == "heaviside":
        return gfunc.heaviside(mol, dom, grid)
    if name == "e-delta":
        return gfunc.delta(mol, dom, grid).masked(
            Idempotent.band_classes(2, [0]))
    if name.startswith("embed:"):
        return gfunc.embed(name.split(":", 1)[1], dom, grid)
    raise ConfigError("unknown target %r" % name)


def cmd_associate(cfg: RunConfig, args) -> int:
    grid = cfg.grid()
    mol = Mollifier(cfg.mollifier_Q, cfg.mollifier_R)
    dom = DomainSpec(cfg.probe_lo - 1.0, cfg.probe_hi + 1.0)
    f = _build_target(args.left, cfg, dom, grid, mol)
    g = _build_target(args.right, cfg, dom, grid, mol)
    probes = default_probe_suite(cfg.probe_lo, cfg.probe_hi)
    rep = gfunc.associate(f, g, probes, v_assoc=cfg.v_assoc)
    out = _out(cfg, args)
    write_json_report(os.path.join(out, "associate.json"),
                      {"left": args.left, "right": args.right,
                       "report": rep.to_json()}, cfg.stamp())
    nets = parallel_map(
        lambda phi: gfunc._difference_pairing(f, g, phi).net.values, probes)
    write_net_csv(os.path.join(out, "pairings.csv"), grid,
                  np.stack(nets, axis=1))
    return EXIT_OK


def cmd_shadow(cfg: RunConfig, args) -> int:
    grid = cfg.grid()
    mol = Mollifier(cfg.mollifier_Q, cfg.mollifier_R)
    dom = DomainSpec(cfg.probe_lo - 1.0, cfg.probe_hi + 1.0)
    f = _build_target(args.target, cfg, dom, grid, mol)
    probes = default_probe_suite(cfg.probe_lo, cfg.probe_hi)
    rep = gfunc.shadow(f, probes, mol, v_assoc=cfg.v_assoc)
    write_json_report(os.path.join(_out(cfg, args), "shadow.json"),
                      {"target": args.target, "report": rep.to_json()},
                      cfg.stamp())
    return EXIT_OK


def cmd_riemann(cfg: RunConfig, args) -> int:
    grid = cfg.grid()
    mol = Mollifier(cfg.mollifier_Q, cfg.mollifier_R)
    dom = DomainSpec(-1.6, 1.6)
    catalog = {"one": "1", "x": "x", "x2": "x**2"}
    if args.f == "delta":
        f = gfunc.delta(mol, dom, grid)
    elif args.f in catalog:
        f = gfunc.embed(catalog[args.f], dom, grid)
    else:
        raise ConfigError("unknown integrand %r" % args.f)
    if args.mesh.startswith("alpha^"):
        mesh = float(args.mesh.split("^")[1])
    elif args.mesh.startswith("one_over_n:"):
        mesh = Hypernatural.floor_power(float(args.mesh.split(":")[1]))
    else:
        raise ConfigError("unknown mesh %r" % args.mesh)
    part = RiemannPartition(args.k_lo, args.k_hi, 4, mesh)
    res = riemann(f, part)
    out = _out(cfg, args)
    write_json_report(os.path.join(out, "riemann.json"), {
        "f": args.f, "mesh": args.mesh,
        "sandwich_ok": res["sandwich_ok"], "bound_ok": res["bound_ok"],
        "gap_valuation": res["gap"].valuation(),
        "grad_exponent": res["grad_exponent"],
    }, cfg.stamp())
    cols = np.stack([res[k].values for k in
                     ("s", "S_star", "S", "gap", "integral", "c_mean")],
                    axis=1)
    write_net_csv(os.path.join(out, "riemann_nets.csv"), grid, cols)
    if not (res["sandwich_ok"] and res["bound_ok"]):
        return EXIT_CERTIFY
    return EXIT_OK


def cmd_ode(cfg: RunConfig, args) -> int:
    with open(args.problem) as fh:
        spec = json.load(fh)
    grid = cfg.grid()
    mol = Mollifier(int(spec.get("Q", cfg.mollifier_Q)),
                    float(spec.get("R", cfg.mollifier_R)))
    problem = OdeProblem(str(spec["f"]), str(spec["h"]),
                         float(spec["x0"]), float(spec["x0dot"]),
                         b=float(spec.get("b", 1.0)), mol=mol, grid=grid)
    res = solve_fixed_point(problem, r_target=float(spec.get("r_target", 8.0)))
    cert = res["certificate"]
    resid = residual_association(problem, res["solution"])
    dsa = [dsa_check(F, m=3, r=float(spec.get("r_target", 8.0)) - 2.0, p0=1)
           for F in res["dsa_differences"]]
    out = _out(cfg, args)
    lattice = np.linspace(problem.domain.lo + 1e-9, problem.domain.hi - 1e-9,
                          257)
    sol_net = np.stack([res["solution"].values(i, lattice, 0)
                        for i in range(len(grid))])
    write_net_csv(os.path.join(out, "ode_solution.csv"), grid, sol_net)
    write_json_report(os.path.join(out, "ode_certificate.json"), {
        "problem": spec,
        "constants": {"C": problem.C, "M": problem.M, "K": problem.K,
                      "L": problem.L, "f_sup": problem.f_sup,
                      "a_formula": problem.a_formula, "a_used": problem.a,
                      "domain": [problem.domain.lo, problem.domain.hi],
                      "lambda": problem.lam},
        "certificate": cert.to_json(),
        "t_lattice": lattice,
        "dsa": dsa,
    }, cfg.stamp())
    write_json_report(os.path.join(out, "ode_residual.json"),
                      {"residual_association": resid.to_json()}, cfg.stamp())
    ok = cert.rate_ok and cert.iterate_bound_ok and resid.associated
    return EXIT_OK if ok else EXIT_CERTIFY


def cmd_membrane(cfg: RunConfig, args) -> int:
    spec = json.loads(args.spec)
    grid = cfg.grid()
    a = eval_scale_expression(str(spec["a"]))
    b = eval_scale_expression(str(spec["b"]))
    net = IntervalNet(a, b)
    results = []
    for probe in spec.get("probes", []):
        p = eval_scale_expression(str(probe)) if isinstance(probe, str) \
            else float(probe)
        res = boundary_classify(p, net, grid)
        results.append({"probe": str(probe), "kind": res["kind"]})
    e = Idempotent.band_classes(2, [0])
    inter = boundary_classify(interleave_endpoints(net, e, grid), net, grid)
    write_json_report(os.path.join(_out(cfg, args), "membrane.json"),
                      {"interval": {"a": str(spec["a"]), "b": str(spec["b"])},
                       "probes": results,
                       "interleaved_endpoints": inter["kind"]}, cfg.stamp())
    return EXIT_OK


def cmd_manifold_demo(cfg: RunConfig, args) -> int:
    spec = manifolds.CircleSpec(1.0)
    grid = manifolds.manifold_grid()
    p = manifolds.GeneralizedPoint.on_circle(spec, grid, lambda e: 1.0 / e)
    supp = manifolds.support(p)
    frc = manifolds.assign_chart(p, spec)
    pc = manifolds.GeneralizedPoint.on_circle(spec, grid, lambda e: 0.4)
    q = manifolds.GeneralizedPoint.on_circle(spec, grid,
                                             lambda e: 0.4 + e ** 2)
    frc_c = manifolds.assign_chart(pc, spec)
    iso = manifolds.isometry_check(frc_c, pc, q)
    probes = [manifolds.GeneralizedPoint(
        grid, np.tile(np.array([0.6, 0.8]), (len(grid), 1)))]
    rv = manifolds.regular_value_check(lambda x: float(x @ x),
                                       lambda x: 2.0 * x, 1.0, probes, grid)
    out = _out(cfg, args)
    write_json_report(os.path.join(out, "manifold.json"), {
        "support_kind": supp["kind"],
        "chart_range": frc.range_indices(),
        "lebesgue_delta": frc.delta,
        "isometry": iso,
        "regular_value": {"regular": rv["regular"], "status": rv["status"],
                          "norm_sq_value": rv["probes"][0]["value"]},
    }, cfg.stamp())
    write_net_csv(os.path.join(out, "chart_table.csv"), grid,
                  frc.table.astype(float))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="colombeau",
        description="Desk-scale experiments with generalized numbers, "
                    "functions and manifolds.")
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides config)")
    ap.add_argument("--grid-count", type=int, help="override grid count")
    ap.add_argument("--Q", type=int, help="override mollifier moment order")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="valuation/norm/classification of a "
                                    "scale expression")
    p.add_argument("--expr", required=True)
    p.set_defaults(fn=cmd_norm)

    p = sub.add_parser("hseq", help="hypersequence convergence certificates")
    p.add_argument("--rule", default="1/n",
                   help="1/n | geometric:RATIO | classical-1/k")
    p.add_argument("--r", default="1,2,5", help="comma separated radii")
    p.set_defaults(fn=cmd_hseq)

    p = sub.add_parser("density", help="idempotent densities")
    p.add_argument("--family", help="complete refined family size")
    p.add_argument("--spec", help="idempotent JSON spec")
    p.set_defaults(fn=cmd_density)

    p = sub.add_parser("associate", help="association verdict for two targets")
    p.add_argument("--left", required=True)
    p.add_argument("--right", default="zero")
    p.set_defaults(fn=cmd_associate)

    p = sub.add_parser("shadow", help="distributional shadow search")
    p.add_argument("--target", required=True)
    p.set_defaults(fn=cmd_shadow)

    p = sub.add_parser("riemann", help="gauge-mesh Riemann sums")
    p.add_argument("--f", default="x2", help="one | x | x2 | delta")
    p.add_argument("--mesh", default="alpha^3",
                   help="alpha^R | one_over_n:S")
    p.add_argument("--k-lo", type=float, default=-1.0)
    p.add_argument("--k-hi", type=float, default=1.0)
    p.set_defaults(fn=cmd_riemann)

    p = sub.add_parser("ode", help="generalized Picard solve of an "
                                   "impulsive second-order problem")
    p.add_argument("--problem", required=True, help="problem JSON file")
    p.set_defaults(fn=cmd_ode)

    p = sub.add_parser("membrane", help="interval membrane classification")
    p.add_argument("--spec", required=True,
                   help='JSON like {"a":"0","b":"1","probes":["0.5"]}')
    p.set_defaults(fn=cmd_membrane)

    p = sub.add_parser("manifold-demo", help="circle chart/support demo")
    p.set_defaults(fn=cmd_manifold_demo)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        if args.grid_count:
            cfg.grid_count = args.grid_count
        if args.Q is not None:
            cfg.mollifier_Q = args.Q
        cfg.__post_init__()
    except ConfigError as ex:
        print("config error: %s" % ex, file=sys.stderr)
        return EXIT_CONFIG
    out = _out(cfg, args)
    try:
        return args.fn(cfg, args)
    except ConfigError as ex:
        print("config error: %s" % ex, file=sys.stderr)
        error_report(out, str(ex), EXIT_CONFIG, cfg.stamp())
        return EXIT_CONFIG
    except ColombeauError as ex:
        print("computation error: %s" % ex, file=sys.stderr)
        error_report(out, str(ex), EXIT_COMPUTE, cfg.stamp())
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
