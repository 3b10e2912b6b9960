"""Generalized points on classical submanifolds: supports, charts, checks.

The chart machinery follows the finite-range construction: cover the
support of a point net with half-Lebesgue-number balls, pick the first
covering ball per scale, and read the chart through it.  Charts of the
catalog (circle, sphere, graphs) are Lipschitz both ways with closed-form
transition derivatives, which is what the isometry and det-unit checks
exercise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bands import Idempotent
from .errors import (AtOrigin, CoverageFailure, EmptyOverlap, OutsideChart,
                     ProbeNotOnLevelSet)
from .estimate import V_NEGLIGIBLE, valuation_report
from .gnum import Classification, Sampled, classify
from .grid import EpsilonGrid
from .matrices import GMatrix, det_unit


def manifold_grid() -> EpsilonGrid:
    """Finer default grid: supports sampled from 1/eps phases need density.

    48 dyadic scales cover the circle only to Hausdorff ~0.25; this grid
    reaches ~0.043, inside the 0.05 documentation tolerance.
    """
    return EpsilonGrid.geometric(0.5, 0.95, 400)


@dataclass
class Chart:
    name: str
    contains: object          # (points: (n, N)) -> bool mask
    apply: object             # (points) -> (n, n_chart) coordinates
    inverse: object           # coords -> points
    margin: object            # (points) -> distance to chart boundary in M
    jacobian_vs: dict = field(default_factory=dict)
    # name -> (points -> transition derivative of other o this^-1)


class CircleSpec:
    """Circle of radius r in the plane with the 4 graph charts.

    Each chart covers an open arc of 5pi/6 around an axis point and
    projects to the complementary coordinate; Lipschitz constants are
    bounded by 1 and 1/sin(pi/12) both ways on those arcs.
    """

    dim = 1
    ambient = 2

    def __init__(self, radius: float = 1.0):
        self.radius = radius
        self.arc_half = 5.0 * math.pi / 12.0   # half-width of each chart arc
        self.centers = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
        self.charts = [self._graph_chart(i) for i in range(4)]

    def point(self, angles: np.ndarray) -> np.ndarray:
        return self.radius * np.stack([np.cos(angles), np.sin(angles)],
                                      axis=-1)

    def angle(self, pts: np.ndarray) -> np.ndarray:
        return np.mod(np.arctan2(pts[..., 1], pts[..., 0]), 2.0 * math.pi)

    def _ang_dist(self, ang, center):
        d = np.mod(ang - center, 2.0 * math.pi)
        return np.minimum(d, 2.0 * math.pi - d)

    def _graph_chart(self, idx: int) -> Chart:
        center = self.centers[idx]
        r = self.radius
        axis = idx % 2              # 0: project to x is bad; see below
        # charts 0,2 sit on the x axis and use y as the coordinate;
        # charts 1,3 sit on the y axis and use x.
        coord = 1 if idx % 2 == 0 else 0

        def contains(pts):
            return self._ang_dist(self.angle(pts), center) < self.arc_half

        def apply(pts):
            return pts[..., coord]

        def inverse(cs):
            other = np.sqrt(np.maximum(r * r - cs * cs, 0.0))
            sign = 1.0 if idx in (0, 1) else -1.0
            out = np.empty(cs.shape + (2,))
            out[..., coord] = cs
            out[..., 1 - coord] = sign * other
            return out

        def margin(pts):
            return r * (self.arc_half - self._ang_dist(self.angle(pts),
                                                       center))

        return Chart("circle-chart-%d" % idx, contains, apply, inverse,
                     margin)

    def transition_derivative(self, i: int, j: int, pts: np.ndarray):
        """d(phi_j o phi_i^-1) at phi_i(points), in closed form."""
        ci = 1 if i % 2 == 0 else 0
        cj = 1 if j % 2 == 0 else 0
        if ci == cj:
            return np.ones(pts.shape[0])   # same coordinate: identity
        # c_j = +- sqrt(r^2 - c_i^2): derivative -c_i / c_j
        u = pts[..., ci]
        v = pts[..., cj]
        return -u / v

    def classical_sample(self, n: int = 512) -> np.ndarray:
        return self.point(np.linspace(0.0, 2.0 * math.pi, n, endpoint=False))


class GraphSpec:
    """Graph of a smooth function g over an interval, single chart."""

    dim = 1
    ambient = 2

    def __init__(self, g_closure, lo: float, hi: float):
        self.g = g_closure
        self.lo, self.hi = lo, hi
        self.charts = [Chart(
            "graph-chart",
            contains=lambda pts: (pts[..., 0] > lo) & (pts[..., 0] < hi),
            apply=lambda pts: pts[..., 0],
            inverse=self._inv,
            margin=lambda pts: np.minimum(pts[..., 0] - lo, hi - pts[..., 0]))]

    def _inv(self, cs):
        out = np.empty(cs.shape + (2,))
        out[..., 0] = cs
        out[..., 1] = self.g(cs)
        return out

    def point(self, xs):
        return self._inv(np.asarray(xs, dtype=float))


@dataclass
class GeneralizedPoint:
    """Net of manifold points (sampled over a grid, ambient coordinates)."""

    grid: EpsilonGrid
    values: np.ndarray        # shape (n_eps, ambient)

    def as_number(self) -> Sampled:
        return Sampled(self.grid, self.values)

    @staticmethod
    def on_circle(spec: CircleSpec, grid: EpsilonGrid, angle_fn) -> "GeneralizedPoint":
        ang = np.array([angle_fn(float(e)) for e in grid.points])
        return GeneralizedPoint(grid, spec.point(ang))


def sharp_valuation(grid: EpsilonGrid, vec_net: np.ndarray) -> float:
    mags = np.linalg.norm(vec_net, axis=-1) if vec_net.ndim > 1 \
        else np.abs(vec_net)
    return valuation_report(grid.points, mags, tail=grid.tail_slice()).value


# -- support ------------------------------------------------------------------


def support(p: GeneralizedPoint, merge_radius: float = 0.01,
            hull_tol: float = 0.05) -> dict:
    """Accumulation set of the representative, with a mask decomposition.

    Discrete supports come back as cluster points with their band masks;
    spread-out tails come back as a hull descriptor with the sampled
    points (Hausdorff resolution is grid-density bound).
    """
    pts = p.values
    n = pts.shape[0]
    tail_from = n // 3
    tail_pts = pts[tail_from:]
    clusters: list[list[int]] = []
    reps: list[np.ndarray] = []
    for idx in range(tail_pts.shape[0]):
        q = tail_pts[idx]
        placed = False
        for c_i, rep in enumerate(reps):
            if np.linalg.norm(q - rep) <= merge_radius:
                clusters[c_i].append(idx + tail_from)
                reps[c_i] = rep + (q - rep) / (len(clusters[c_i]))
                placed = True
                break
        if not placed:
            clusters.append([idx + tail_from])
            reps.append(q.copy())
    if len(reps) > 12:
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        return {"kind": "hull", "points": pts, "bounds": (lo, hi),
                "tolerance": hull_tol, "n_samples": n}
    assign = np.empty(n, dtype=int)
    for i in range(n):
        assign[i] = int(np.argmin([np.linalg.norm(pts[i] - r) for r in reps]))
    decomposition = []
    for c_i, rep in enumerate(reps):
        ind = (assign == c_i).astype(float)
        masked = np.where(ind[:, None] > 0, pts - rep, 0.0)
        v = sharp_valuation(p.grid, masked)
        decomposition.append({"point": rep, "indicator": ind,
                              "masked_valuation": v})
    return {"kind": "points", "points": np.array(reps),
            "decomposition": decomposition}


def support_hausdorff(supp: dict, target_pts: np.ndarray) -> float:
    """One-sided Hausdorff distance from the target set to the support."""
    samples = supp["points"] if supp["kind"] == "points" else supp["points"]
    out = 0.0
    for q in target_pts:
        out = max(out, float(np.min(np.linalg.norm(samples - q, axis=-1))))
    return out


# -- charts -------------------------------------------------------------------


@dataclass
class FiniteRangeChart:
    spec: object
    table: np.ndarray          # per-scale chart index
    ball_centers: np.ndarray
    delta: float               # Lebesgue number of the covering

    def range_indices(self):
        return sorted(set(int(i) for i in self.table))

    def principal(self) -> bool:
        return len(self.range_indices()) == 1

    def apply(self, p: GeneralizedPoint) -> Sampled:
        coords = np.empty(len(p.grid))
        for i in range(len(p.grid)):
            ch = self.spec.charts[int(self.table[i])]
            pt = p.values[i:i + 1]
            if not bool(ch.contains(pt)[0]):
                raise OutsideChart("point leaves chart %s at scale %d"
                                   % (ch.name, i))
            coords[i] = float(ch.apply(pt)[0])
        return Sampled(p.grid, coords)

    def margins(self, p: GeneralizedPoint) -> np.ndarray:
        out = np.empty(len(p.grid))
        for i in range(len(p.grid)):
            ch = self.spec.charts[int(self.table[i])]
            out[i] = float(ch.margin(p.values[i:i + 1])[0])
        return out


def assign_chart(p: GeneralizedPoint, spec) -> FiniteRangeChart:
    """Finite-range chart via the half-Lebesgue-number ball covering.

    Ball centers are taken greedily from the support samples in discovery
    order (the construction does not prescribe a tie-break; first match in
    this fixed order is used and recorded).
    """
    supp = support(p)
    samples = supp["points"] if supp["kind"] == "points" else supp["points"]
    samples = np.atleast_2d(samples)
    # Lebesgue number over the support: best chart margin per sample
    margins = []
    for q in samples:
        best = max(float(ch.margin(q[None, :])[0]) for ch in spec.charts)
        margins.append(best)
    delta = min(margins)
    if delta <= 0:
        raise CoverageFailure("support touches every chart boundary")
    delta1 = 0.5 * delta
    centers = []
    for q in samples:
        if all(np.linalg.norm(q - c) > delta1 for c in centers):
            centers.append(q)
    centers = np.array(centers)
    chart_of_center = []
    for c in centers:
        margins_c = [float(ch.margin(c[None, :])[0]) for ch in spec.charts]
        chart_of_center.append(int(np.argmax(margins_c)))
    n = len(p.grid)
    table = np.empty(n, dtype=int)
    for i in range(n):
        d = np.linalg.norm(centers - p.values[i], axis=-1)
        hits = np.nonzero(d < delta1)[0]
        if hits.size == 0:
            raise CoverageFailure(
                "scale %d escaped the covering; refine the grid" % i)
        table[i] = chart_of_center[int(hits[0])]
    frc = FiniteRangeChart(spec, table, centers, delta)
    m = frc.margins(p)
    if np.any(m <= 0.5 * delta - 1e-12):
        raise CoverageFailure("half-Lebesgue margin violated")
    return frc


def isometry_check(chart: FiniteRangeChart, p: GeneralizedPoint,
                   q: GeneralizedPoint, tol: float = 0.05) -> dict:
    """Chart images preserve sharp valuations of differences."""
    v_amb = sharp_valuation(p.grid, p.values - q.values)
    cp = chart.apply(p)
    cq = chart.apply(q)
    v_img = sharp_valuation(p.grid, cp.values - cq.values)
    if v_amb == math.inf and v_img == math.inf:
        return {"ok": True, "ambient": v_amb, "image": v_img}
    ok = (math.isfinite(v_amb) and math.isfinite(v_img)
          and abs(v_amb - v_img) <= tol)
    return {"ok": bool(ok), "ambient": v_amb, "image": v_img}


def transition_check(c1: FiniteRangeChart, c2: FiniteRangeChart,
                     p: GeneralizedPoint) -> dict:
    """Determinant-unit and boundedness of the per-scale transition maps."""
    spec = c1.spec
    n = len(p.grid)
    ders = np.empty(n)
    for i in range(n):
        i1, i2 = int(c1.table[i]), int(c2.table[i])
        pt = p.values[i:i + 1]
        ch1, ch2 = spec.charts[i1], spec.charts[i2]
        if not (bool(ch1.contains(pt)[0]) and bool(ch2.contains(pt)[0])):
            raise EmptyOverlap("point leaves the chart overlap at scale %d"
                               % i)
        ders[i] = float(spec.transition_derivative(i1, i2, pt)[0]) \
            if i1 != i2 else 1.0
    det = det_unit(GMatrix([[Sampled(p.grid, ders)]]))
    bounded = float(np.max(np.abs(ders))) < 1e6 \
        and float(np.min(np.abs(ders))) > 1e-6
    return {"det_unit": det["invertible"], "smooth_ok": bounded,
            "derivatives": ders}


# -- differential checks -------------------------------------------------------


def regular_value_check(f_value, f_grad, a, probes, grid: EpsilonGrid) -> dict:
    """Sufficient unit-gradient criterion for a regular value.

    Returns regular=True when |grad f|^2 classifies as a unit at every
    probe; a zero-divisor or indeterminate squared norm is reported as
    inconclusive (the full ideal-generation criterion is out of scope).
    """
    results = []
    for p in probes:
        vals = np.array([f_value(p.values[i]) for i in range(len(grid))])
        resid = valuation_report(grid.points, np.abs(vals - a),
                                 tail=grid.tail_slice())
        if resid.value < V_NEGLIGIBLE:
            raise ProbeNotOnLevelSet("probe misses the level set "
                                     "(valuation %.2f)" % resid.value)
        grads = np.array([f_grad(p.values[i]) for i in range(len(grid))])
        sq = Sampled(grid, np.sum(grads * grads, axis=-1))
        kind = classify(sq)
        results.append({"classification": kind.value,
                        "norm_sq": sq,
                        "value": float(sq.values[0])})
    kinds = {r["classification"] for r in results}
    if kinds == {"unit"}:
        return {"regular": True, "status": "unit-criterion", "probes": results}
    if "zero" in kinds:
        return {"regular": False, "status": "gradient-vanishes",
                "probes": results}
    # zero divisors / indeterminate: the unit test is only sufficient and
    # ideal generation is not decided here
    return {"regular": False, "status": "inconclusive", "probes": results}


def chain_rule_check(f_jac, g_jac, composite_jac, p: GeneralizedPoint,
                     f_value) -> dict:
    """Composite derivative equals the product of the factors' derivatives."""
    n = len(p.grid)
    worst = 0.0
    diffs = np.empty(n)
    for i in range(n):
        x = p.values[i]
        lhs = np.atleast_2d(composite_jac(x))
        rhs = np.atleast_2d(g_jac(f_value(x))) @ np.atleast_2d(f_jac(x))
        d = float(np.max(np.abs(lhs - rhs)))
        diffs[i] = d
        worst = max(worst, d)
    rep = valuation_report(p.grid.points, diffs, tail=p.grid.tail_slice())
    return {"ok": rep.value >= V_NEGLIGIBLE, "max_abs": worst,
            "valuation": rep.value}


def scale_exponent_function(x: Sampled) -> Sampled:
    """The net eps ** (-2 ln |x_eps|), constant on per-scale norm spheres.

    Requires the norm net to classify as a unit; computed in log space so
    super-polynomial decay or growth survives.
    """
    mags = x.magnitudes()
    if classify(x.abs()) is not Classification.UNIT:
        raise AtOrigin("norm net is not a unit; the exponent is undefined")
    log_eps = np.log(x.grid.points)
    logs = -2.0 * np.log(mags) * log_eps
    vals = np.where(np.abs(logs) < 700.0,
                    np.exp(np.clip(logs, -745.0, 700.0)), 0.0)
    vals = np.where(logs >= 700.0, np.inf, vals)
    if np.any(~np.isfinite(vals)):
        from .errors import NotModerate
        raise NotModerate("scale exponent net grows beyond float range")
    return Sampled(x.grid, vals, log_abs=logs)


def local_constancy_report(x: Sampled, y: Sampled) -> dict:
    """How constant the scale-exponent function is near x.

    Exactly constant under per-scale norm-preserving perturbations; for a
    sharp-ball perturbation the measured valuation gap of f(y) - f(x) is
    reported rather than asserted negligible.
    """
    fx = scale_exponent_function(x)
    fy = scale_exponent_function(y)
    d = fy - fx
    gap = d.valuation()
    base = fx.valuation()
    return {"exact": bool(np.array_equal(fx.values, fy.values)),
            "difference_valuation": gap,
            "base_valuation": base}
