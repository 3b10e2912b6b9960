"""Hypernatural indices, gauge powers alpha**n, and hypersequences.

Convergence in the sharp topology is certified, not proved: for each probe
radius a catalog of explicit threshold rules (power and logarithmic, plus
rule hints carried by the sequence) is searched, and a finite successor
stencil above the candidate threshold is checked for ball membership of
the differences.  Failures come back as reports with a counterexample
pair, never as exceptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotModerate
from .estimate import V_MAX
from .gnum import GeneralizedNumber, Sampled, Symbolic, ball_contains, sharp_dist
from .grid import EpsilonGrid, default_grid
from .bands import Idempotent


class Hypernatural:
    """Moderate net of nonnegative integers, given by a closed-form rule.

    ``math.inf`` is an allowed rule value and encodes the 0/infinity string
    exponents whose gauge powers are idempotents.
    """

    def __init__(self, rule, description: str):
        self.rule = rule
        self.description = description

    @staticmethod
    def constant(k: int) -> "Hypernatural":
        return Hypernatural(lambda eps: float(k), str(k))

    @staticmethod
    def floor_power(s: float, shift: float = 0.0) -> "Hypernatural":
        desc = ("floor(eps^-%g+%g)" % (s, shift)) if shift else \
            ("floor(eps^-%g)" % s)
        return Hypernatural(lambda eps: math.floor(eps ** (-s) + shift), desc)

    @staticmethod
    def floor_log(c: float) -> "Hypernatural":
        return Hypernatural(lambda eps: math.floor(c * abs(math.log(eps))),
                            "floor(%g*|ln(eps)|)" % c)

    @staticmethod
    def geometric_threshold(t: float, ratio: float) -> "Hypernatural":
        """Threshold putting ratio**n below the gauge power alpha**t."""
        c = t / abs(math.log(ratio))
        return Hypernatural(
            lambda eps: 2.0 * math.floor(c * abs(math.log(eps))),
            "2*floor((%g/|ln(%g)|)*|ln(eps)|)" % (t, ratio))

    @staticmethod
    def idempotent_exponent(e: Idempotent) -> "Hypernatural":
        """String of 0s (on the support) and infinities (off it)."""
        return Hypernatural(
            lambda eps, _e=e: 0.0 if _e.contains(eps) else math.inf,
            "0-on-%s-else-inf" % e.describe())

    def values(self, grid: EpsilonGrid) -> np.ndarray:
        out = np.array([float(self.rule(float(e))) for e in grid.points])
        finite = out[np.isfinite(out)]
        if np.any(finite < 0) or np.any(np.abs(finite - np.round(finite)) > 0.5):
            raise ValueError("rule must produce nonnegative integers")
        return out

    def check_moderate(self, grid: EpsilonGrid) -> float:
        """Growth exponent r with n_eps <= eps^-r; raises NotModerate."""
        vals = np.maximum(self.values(grid), 1.0)
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            return 0.0
        slopes = np.log(vals) / np.log(grid.points[: vals.size])
        worst = float(np.min(slopes))
        if worst < -V_MAX:
            raise NotModerate("index net grows like eps^%.1f" % worst)
        return max(0.0, -worst)

    def shifted(self, k: int) -> "Hypernatural":
        return Hypernatural(lambda eps: self.rule(eps) + k,
                            "%s+%d" % (self.description, k))

    def scaled(self, m: int, k: int = 0) -> "Hypernatural":
        return Hypernatural(lambda eps: m * self.rule(eps) + k,
                            "%d*%s%+d" % (m, self.description, k))

    def __repr__(self):
        return "Hypernatural(%s)" % self.description


def alpha_pow(n: Hypernatural, grid: EpsilonGrid | None = None) -> Sampled:
    """The net eps**n_eps, carried in log space below the float floor."""
    grid = grid or default_grid()
    nv = n.values(grid)
    n.check_moderate(grid)
    log_eps = np.log(grid.points)
    logs = np.where(np.isfinite(nv), nv * log_eps, -np.inf)
    vals = np.where(logs > -700.0, np.exp(np.maximum(logs, -745.0)), 0.0)
    return Sampled(grid, vals, log_abs=logs)


# ---------------------------------------------------------------------------


class Hypersequence:
    """Map from hypernatural indices to scalar generalized numbers."""

    def __init__(self, rule, grid: EpsilonGrid, hint=None, description=""):
        self._rule = rule
        self.grid = grid
        self.hint = hint or {}
        self.description = description

    def at(self, n: Hypernatural) -> GeneralizedNumber:
        return self._rule(n)

    @staticmethod
    def one_over_n(grid: EpsilonGrid | None = None) -> "Hypersequence":
        grid = grid or default_grid()

        def rule(n: Hypernatural) -> Sampled:
            nv = np.maximum(n.values(grid), 1.0)
            return Sampled(grid, 1.0 / nv, log_abs=-np.log(nv))

        return Hypersequence(rule, grid, description="1/n")

    @staticmethod
    def geometric(ratio: float, grid: EpsilonGrid | None = None) -> "Hypersequence":
        grid = grid or default_grid()

        def rule(n: Hypernatural) -> Sampled:
            nv = n.values(grid)
            logs = np.where(np.isfinite(nv), nv * math.log(ratio), -np.inf)
            vals = np.where(logs > -700.0, np.exp(np.maximum(logs, -745.0)), 0.0)
            return Sampled(grid, vals, log_abs=logs)

        return Hypersequence(rule, grid, hint={"geometric_ratio": ratio},
                             description="%g^n" % ratio)

    @staticmethod
    def classical_lift(seq, grid: EpsilonGrid | None = None,
                       description="lifted") -> "Hypersequence":
        """Lift of a classical sequence: value at eps is seq(n_eps).

        Moderateness of the value net is enforced by the Sampled
        constructor (NotModerate when seq outgrows every gauge power).
        """
        grid = grid or default_grid()

        def rule(n: Hypernatural) -> Sampled:
            nv = n.values(grid)
            try:
                vals = np.array([float(seq(int(v))) if np.isfinite(v) else 0.0
                                 for v in nv])
            except OverflowError as ex:
                raise NotModerate("lifted sequence overflows: %s" % ex)
            return Sampled(grid, vals)

        return Hypersequence(rule, grid, description=description)

    @staticmethod
    def masked_gauge_power(k: float, grid: EpsilonGrid | None = None) -> "Hypersequence":
        """x(n) = e_n * alpha^k, e_n the indicator of the reciprocal range of n.

        Distinct indices with disjoint ranges give values at sharp distance
        exp(-k) no matter how deep the indices sit, so this hypersequence
        has no limit; the witness lives at radii r >= k.  Note the grid can
        only see indicator sets that meet it exactly, so the failure is
        demonstrated with explicit index pairs, not the threshold catalog.
        """
        grid = grid or default_grid()

        def rule(n: Hypernatural) -> Sampled:
            rng = {v for v in n.values(grid) if np.isfinite(v) and v > 0}
            hits = np.array([1.0 if 1.0 / float(e) in rng else 0.0
                             for e in grid.points])
            return Sampled(grid, hits * grid.points ** k)

        return Hypersequence(rule, grid, description="masked-alpha^%g" % k)


def _stencil(n0: Hypernatural):
    return [n0.shifted(1), n0.shifted(2), n0.shifted(3),
            n0.scaled(2, 1), n0.scaled(4, 1), n0.scaled(8, 5)]


def _threshold_catalog(x: Hypersequence, r: float):
    cat = [Hypernatural.floor_power(r, 1.5),
           Hypernatural.floor_power(r + 1.0, 1.5)]
    if "geometric_ratio" in x.hint:
        ratio = x.hint["geometric_ratio"]
        cat.insert(0, Hypernatural.geometric_threshold(r, ratio))
        cat.insert(1, Hypernatural.geometric_threshold(r + 1.0, ratio))
    cat += [Hypernatural.floor_power(s) for s in (r, r + 1.0, 2.0 * r)]
    cat += [Hypernatural.floor_log(c) for c in (2.0, 8.0, 32.0, 128.0)]
    return cat


@dataclass
class RadiusReport:
    r: float
    certified: bool
    n0_rule: str | None = None
    limit_valuation_lb: float | None = None
    limit_is_zero: bool | None = None
    counterexample: dict | None = None

    def to_json(self) -> dict:
        out = {"r": self.r, "certified": self.certified}
        if self.certified:
            out["n0_rule"] = self.n0_rule
            out["limit_valuation_lb"] = self.limit_valuation_lb
            out["limit_is_zero"] = self.limit_is_zero
        elif self.counterexample:
            out["counterexample"] = self.counterexample
        return out


def hseq_limit(x: Hypersequence, radii) -> list[RadiusReport]:
    """Cauchy certification over the threshold catalog, radius by radius."""
    reports = []
    for r in radii:
        if r <= 0:
            raise ValueError("probe radii must be positive")
        report = RadiusReport(r=float(r), certified=False)
        for n0 in _threshold_catalog(x, float(r)):
            try:
                n0.check_moderate(x.grid)
            except NotModerate:
                continue
            stencil = _stencil(n0)
            try:
                values = [x.at(n) for n in stencil]
            except NotModerate:
                continue
            ok = True
            witness = None
            for i in range(len(values)):
                for j in range(i + 1, len(values)):
                    diff = values[j] - values[i]
                    if not ball_contains(0, float(r), diff):
                        ok = False
                        witness = {
                            "n": stencil[j].description,
                            "m": stencil[i].description,
                            "valuation": float(diff.valuation()),
                        }
                        break
                if not ok:
                    break
            if ok:
                deepest = values[-1]
                lb = min(float((values[j] - values[i]).valuation())
                         for i in range(len(values))
                         for j in range(i + 1, len(values)))
                report = RadiusReport(
                    r=float(r), certified=True, n0_rule=n0.description,
                    limit_valuation_lb=lb,
                    limit_is_zero=bool(ball_contains(0, float(r), deepest)))
                break
            if report.counterexample is None:
                report.counterexample = witness
        reports.append(report)
    return reports


def series_converges(a: Hypersequence, radii=(1.0, 2.0, 5.0)) -> bool:
    """Summability criterion: the terms must converge to zero sharply."""
    reports = hseq_limit(a, radii)
    return all(rep.certified and rep.limit_is_zero for rep in reports)


def classical_cauchy_check(seq, indices=range(1, 11)) -> dict:
    """Sharp pairwise distances of a classical sequence at constant indices.

    Distinct classical values sit at distance one from each other, so no
    classical sequence is Cauchy in the sharp metric.
    """
    idx = list(indices)
    vals = [Symbolic.constant(float(seq(k))) for k in idx]
    dists = {}
    all_one = True
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            d = sharp_dist(vals[i], vals[j])
            dists["(%d,%d)" % (idx[i], idx[j])] = d
            if d != 1.0:
                all_one = False
    return {"all_pairwise_distance_one": all_one, "distances": dists,
            "cauchy": False if all_one else None}
