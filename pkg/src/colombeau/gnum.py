"""Colombeau generalized numbers in two interoperable representations.

``Symbolic`` values are finite sums of monomials c * alpha**p carried on
idempotent masks; their canonical form resolves mask overlaps into atoms so
that cancellation is exact and the scale exponent is the true minimum
exponent.  ``Sampled`` values are nets over a finite epsilon grid; their
exponents come from the tail estimators in :mod:`colombeau.estimate`.

Symbolic is exact and used for algebraic assertions; Sampled is what the
analysis pipelines produce.  Mixed arithmetic promotes Symbolic onto the
Sampled operand's grid (exact evaluation, never interpolation).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bands import Idempotent, check_family
from .errors import NotAUnit
from .estimate import V_NEGLIGIBLE, ValuationReport, valuation_report
from .grid import EpsilonGrid, default_grid


class Classification(enum.Enum):
    ZERO = "zero"
    UNIT = "unit"
    ZERO_DIVISOR = "zero-divisor"
    INDETERMINATE = "indeterminate"


class Order(enum.Enum):
    LT = "lt"
    GT = "gt"
    EQ = "eq"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class Term:
    coef: float
    exponent: float
    mask: Idempotent


class GeneralizedNumber:
    """Common operator plumbing; concrete state lives in the subclasses."""

    def valuation(self) -> float:
        raise NotImplementedError

    def valuation_full(self) -> ValuationReport:
        raise NotImplementedError

    def sharp_norm(self) -> float:
        v = self.valuation()
        return 0.0 if v == math.inf else math.exp(-v)

    def is_zero(self) -> bool:
        return self.valuation() == math.inf

    # arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return _binary("add", self, _coerce(other))

    def __radd__(self, other):
        return _binary("add", _coerce(other), self)

    def __sub__(self, other):
        return _binary("sub", self, _coerce(other))

    def __rsub__(self, other):
        return _binary("sub", _coerce(other), self)

    def __mul__(self, other):
        return _binary("mul", self, _coerce(other))

    def __rmul__(self, other):
        return _binary("mul", _coerce(other), self)

    def __neg__(self):
        return self * Symbolic.constant(-1.0)

    def __eq__(self, other):
        if isinstance(other, (int, float, GeneralizedNumber)):
            return compare(self, _coerce(other)) is Order.EQ
        return NotImplemented

    __hash__ = None

    def abs(self) -> "GeneralizedNumber":
        raise NotImplementedError


def _coerce(x) -> GeneralizedNumber:
    if isinstance(x, GeneralizedNumber):
        return x
    if isinstance(x, (int, float)):
        return Symbolic.constant(float(x))
    if isinstance(x, Idempotent):
        return Symbolic.from_mask(x)
    raise TypeError("cannot interpret %r as a generalized number" % (x,))


# ---------------------------------------------------------------------------
# Symbolic representation


def _atoms_of(masks):
    """Disjoint nonzero products of the masks and their complements."""
    atoms = [Idempotent.one()]
    for m in masks:
        nxt = []
        for a in atoms:
            p = a * m
            if not p.is_zero():
                nxt.append(p)
            c = a * m.complement()
            if not c.is_zero():
                nxt.append(c)
        atoms = nxt
    return atoms


def _canonical(terms):
    by_exp: dict[float, list[Term]] = {}
    for t in terms:
        if t.coef == 0.0 or t.mask.is_zero():
            continue
        by_exp.setdefault(float(t.exponent), []).append(t)
    out = []
    for p in sorted(by_exp):
        group = by_exp[p]
        atoms = _atoms_of([t.mask for t in group])
        merged: dict[float, Idempotent] = {}
        for a in atoms:
            c = 0.0
            for t in group:
                if (t.mask * a) == a:
                    c += t.coef
            if c != 0.0:
                # re-merge atoms sharing a coefficient into one mask
                merged[c] = a if c not in merged else (merged[c] | a)
        for c in sorted(merged):
            out.append(Term(c, p, merged[c]))
    return tuple(out)


class Symbolic(GeneralizedNumber):
    """Finite monomial sum sum_i c_i * alpha**p_i on idempotent masks."""

    __slots__ = ("terms",)

    def __init__(self, terms, canonical=False):
        self.terms = tuple(terms) if canonical else _canonical(terms)

    # constructors ---------------------------------------------------

    @staticmethod
    def constant(c: float) -> "Symbolic":
        return Symbolic([Term(float(c), 0.0, Idempotent.one())])

    @staticmethod
    def alpha(p: float = 1.0, coef: float = 1.0,
              mask: Idempotent | None = None) -> "Symbolic":
        return Symbolic([Term(float(coef), float(p),
                              mask or Idempotent.one())])

    @staticmethod
    def zero() -> "Symbolic":
        return Symbolic([])

    @staticmethod
    def from_mask(e: Idempotent) -> "Symbolic":
        return Symbolic([Term(1.0, 0.0, e)])

    # structure ---------------------------------------------------------

    def global_atoms(self):
        """Atoms of all masks present, plus the uncovered remainder."""
        masks = [t.mask for t in self.terms]
        atoms = _atoms_of(masks)
        covered = Idempotent.zero()
        for m in masks:
            covered = covered | m
        rem = covered.complement()
        if not rem.is_zero():
            atoms = [a for a in atoms if (a * rem) != a]
        return atoms, rem

    def restricted_terms(self, atom: Idempotent):
        """Terms covering ``atom``, sorted by exponent (at most one per exponent)."""
        out = [t for t in self.terms if (t.mask * atom) == atom]
        out.sort(key=lambda t: t.exponent)
        return out

    def leading_sign(self, atom: Idempotent) -> int:
        ts = self.restricted_terms(atom)
        if not ts:
            return 0
        return 1 if ts[0].coef > 0 else -1

    def valuation(self) -> float:
        if not self.terms:
            return math.inf
        return min(t.exponent for t in self.terms)

    def valuation_full(self) -> ValuationReport:
        v = self.valuation()
        return ValuationReport(v, v if v != math.inf else float("nan"),
                               v if v != math.inf else float("nan"),
                               len(self.terms), "symbolic")

    def abs(self) -> "Symbolic":
        atoms, _rem = self.global_atoms()
        terms = []
        for a in atoms:
            ts = self.restricted_terms(a)
            if not ts:
                continue
            s = 1.0 if ts[0].coef > 0 else -1.0
            terms.extend(Term(s * t.coef, t.exponent, a) for t in ts)
        return Symbolic(terms)

    def sample(self, grid: EpsilonGrid) -> "Sampled":
        """Exact evaluation of every monomial on the grid points.

        Per point the sum is factored through its smallest exponent so the
        log of |value| survives float underflow without losing cancellation.
        """
        eps = grid.points
        log_eps = np.log(eps)
        covers = [t.mask.indicator(eps).astype(bool) for t in self.terms]
        vals = np.zeros(len(grid))
        logs = np.full(len(grid), -np.inf)
        for i in range(len(grid)):
            ts = [t for t, c in zip(self.terms, covers) if c[i]]
            if not ts:
                continue
            p_min = min(t.exponent for t in ts)
            # scalar np.exp matches the vectorized path bit for bit
            scaled = math.fsum(t.coef * float(np.exp((t.exponent - p_min)
                                                     * log_eps[i]))
                               for t in ts)
            if scaled == 0.0:
                continue
            logs[i] = p_min * log_eps[i] + float(np.log(abs(scaled)))
            vals[i] = math.copysign(float(np.exp(logs[i])), scaled) \
                if logs[i] > -700 else 0.0
        return Sampled(grid, vals, log_abs=logs)

    def __repr__(self):
        if not self.terms:
            return "Symbolic(0)"
        bits = []
        for t in self.terms:
            b = "%g*alpha^%g" % (t.coef, t.exponent)
            if not t.mask.is_one():
                b += "[%s]" % t.mask.describe()
            bits.append(b)
        return "Symbolic(%s)" % " + ".join(bits)


# ---------------------------------------------------------------------------
# Sampled representation


class Sampled(GeneralizedNumber):
    """Net of values over an epsilon grid; rejects non-moderate tails.

    ``log_abs`` optionally carries exact natural logs of |values| so that
    scale exponents survive float underflow (gauge powers below 1e-300).
    """

    __slots__ = ("grid", "values", "log_abs", "_vrep")

    def __init__(self, grid: EpsilonGrid, values, log_abs=None):
        self.grid = grid
        v = np.asarray(values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if v.shape[0] != len(grid):
            raise ValueError("values do not match the grid length")
        self.values = v
        self.log_abs = None if log_abs is None else np.asarray(log_abs, float)
        self._vrep = None
        self.valuation_full()  # moderateness gate at construction

    @staticmethod
    def from_function(grid: EpsilonGrid, fn) -> "Sampled":
        return Sampled(grid, np.array([fn(float(e)) for e in grid.points]))

    @property
    def dim(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def magnitudes(self) -> np.ndarray:
        if self.values.ndim == 1:
            return np.abs(self.values)
        return np.linalg.norm(self.values, axis=1)

    def _logs(self) -> np.ndarray | None:
        if self.log_abs is not None and self.values.ndim == 1:
            return self.log_abs
        return None

    def valuation_full(self) -> ValuationReport:
        if self._vrep is None:
            self._vrep = valuation_report(
                self.grid.points, self.magnitudes(), log_abs=self._logs(),
                tail=self.grid.tail_slice())
        return self._vrep

    def valuation(self) -> float:
        return self.valuation_full().value

    def abs(self) -> "Sampled":
        return Sampled(self.grid, self.magnitudes(), log_abs=self._logs())

    def __repr__(self):
        return "Sampled(n=%d, V~%.3g)" % (len(self.grid), self.valuation())


# ---------------------------------------------------------------------------
# binary dispatch


def _binary(op: str, a: GeneralizedNumber, b: GeneralizedNumber):
    if isinstance(a, Symbolic) and isinstance(b, Symbolic):
        return _symbolic_binary(op, a, b)
    if isinstance(a, Symbolic):
        a = a.sample(b.grid)
    if isinstance(b, Symbolic):
        b = b.sample(a.grid)
    return _sampled_binary(op, a, b)


def _symbolic_binary(op, a: Symbolic, b: Symbolic) -> Symbolic:
    if op == "add":
        return Symbolic(a.terms + b.terms)
    if op == "sub":
        return Symbolic(a.terms + tuple(Term(-t.coef, t.exponent, t.mask)
                                        for t in b.terms))
    if op == "mul":
        terms = []
        for s in a.terms:
            for t in b.terms:
                m = s.mask * t.mask
                if not m.is_zero():
                    terms.append(Term(s.coef * t.coef,
                                      s.exponent + t.exponent, m))
        return Symbolic(terms)
    raise ValueError(op)


def _aligned(a: Sampled, b: Sampled):
    if a.grid.same_points(b.grid):
        return a.grid, a, b
    grid, ia, ib = a.grid.align_with(b.grid)
    sa = Sampled(grid, a.values[ia],
                 None if a.log_abs is None else a.log_abs[ia])
    sb = Sampled(grid, b.values[ib],
                 None if b.log_abs is None else b.log_abs[ib])
    return grid, sa, sb


def _sampled_binary(op, a: Sampled, b: Sampled) -> Sampled:
    grid, a, b = _aligned(a, b)
    if op == "add":
        return Sampled(grid, a.values + b.values)
    if op == "sub":
        return Sampled(grid, a.values - b.values)
    if op == "mul":
        vals = a.values * b.values
        logs = None
        la, lb = a._logs(), b._logs()
        if la is not None or lb is not None:
            with np.errstate(divide="ignore"):
                la = la if la is not None else np.log(np.abs(a.values))
                lb = lb if lb is not None else np.log(np.abs(b.values))
            logs = la + lb
        return Sampled(grid, vals, log_abs=logs)
    raise ValueError(op)


# ---------------------------------------------------------------------------
# classification / inversion


def classify(x: GeneralizedNumber) -> Classification:
    """Unit / zero divisor / zero dichotomy (exact for Symbolic)."""
    x = _coerce(x)
    if isinstance(x, Symbolic):
        if not x.terms:
            return Classification.ZERO
        atoms, rem = x.global_atoms()
        if not rem.is_zero():
            return Classification.ZERO_DIVISOR
        # canonical form guarantees a nonzero leading coefficient per atom
        return Classification.UNIT
    v = x.valuation_full()
    if v.value == math.inf:
        return Classification.ZERO
    tail = x.grid.tail_slice()
    mags = x.magnitudes()[tail]
    logs = x._logs()
    tl = logs[tail] if logs is not None else None
    log_eps = np.log(x.grid.points[tail])
    with np.errstate(divide="ignore"):
        lv = tl if tl is not None else np.where(mags > 0, np.log(
            np.where(mags > 0, mags, 1.0)), -np.inf)
    zeroish = ~np.isfinite(lv) | (lv / log_eps >= V_NEGLIGIBLE)
    if np.all(zeroish):
        return Classification.ZERO
    if np.any(zeroish):
        slopes = (lv / log_eps)[~zeroish]
        if np.max(slopes) < 0.5 * V_NEGLIGIBLE:
            return Classification.ZERO_DIVISOR
        return Classification.INDETERMINATE
    slopes = lv / log_eps
    if np.max(slopes) >= 0.5 * V_NEGLIGIBLE:
        return Classification.INDETERMINATE
    return Classification.UNIT


def annihilator(x: Symbolic) -> Idempotent | None:
    """A nontrivial idempotent with e*x = 0, when one exists."""
    if not isinstance(x, Symbolic) or not x.terms:
        return None
    _atoms, rem = x.global_atoms()
    return None if rem.is_zero() else rem


def invert(x: GeneralizedNumber, grid: EpsilonGrid | None = None):
    """Multiplicative inverse of a unit.

    Symbolic inputs stay symbolic when each mask cell carries a single
    monomial; otherwise the inverse is computed pointwise on ``grid``
    (default grid when omitted).
    """
    x = _coerce(x)
    if classify(x) is not Classification.UNIT:
        raise NotAUnit("cannot invert: %r is not a unit" % (x,))
    if isinstance(x, Symbolic):
        atoms, _rem = x.global_atoms()
        terms = []
        monomial = True
        for a in atoms:
            ts = x.restricted_terms(a)
            if len(ts) != 1:
                monomial = False
                break
            t = ts[0]
            terms.append(Term(1.0 / t.coef, -t.exponent, a))
        if monomial:
            return Symbolic(terms)
        x = x.sample(grid or default_grid())
    vals = x.values
    if np.any(vals == 0.0):
        raise NotAUnit("sampled representative vanishes at a grid scale")
    logs = x._logs()
    return Sampled(x.grid, 1.0 / vals,
                   log_abs=None if logs is None else -logs)


# ---------------------------------------------------------------------------
# order


def _tail_signs(d: Sampled):
    """Per-point tail signs with the negligibility floor alpha^v_negl."""
    tail = d.grid.tail_slice()
    vals = d.values[tail]
    if np.iscomplexobj(vals):
        raise TypeError("order comparison requires real nets")
    log_eps = np.log(d.grid.points[tail])
    with np.errstate(divide="ignore"):
        logs = np.where(vals != 0, np.log(np.abs(np.where(vals != 0, vals, 1.0))),
                        -np.inf)
    negligible = logs <= V_NEGLIGIBLE * log_eps
    signs = np.sign(vals)
    signs[negligible] = 0
    return signs


def compare(x, y) -> Order:
    """Partial order verdict; Incomparable is a value, not an error."""
    x, y = _coerce(x), _coerce(y)
    if isinstance(x, Symbolic) and isinstance(y, Symbolic):
        d = _symbolic_binary("sub", x, y)
        if not d.terms:
            return Order.EQ
        atoms, rem = d.global_atoms()
        signs = {d.leading_sign(a) for a in atoms}
        signs.discard(0)
        if not signs:
            return Order.EQ
        if signs == {1}:
            return Order.GT
        if signs == {-1}:
            return Order.LT
        return Order.INCOMPARABLE
    d = x - y
    if d.valuation() == math.inf:
        return Order.EQ
    signs = set(_tail_signs(d).tolist())
    signs.discard(0.0)
    if not signs:
        return Order.EQ
    if signs == {1.0}:
        return Order.GT
    if signs == {-1.0}:
        return Order.LT
    return Order.INCOMPARABLE


def sharp_dist(x, y) -> float:
    x, y = _coerce(x), _coerce(y)
    v = (x - y).valuation()
    return 0.0 if v == math.inf else math.exp(-v)


def ball_contains(center, r: float, y, margin: float = 0.05) -> bool:
    """Membership of y in the gauge ball V_r[center] = {|y-c| < alpha^r}.

    This is the order statement of the ball definition: strict pointwise
    domination on the tail (negligible entries pass), exact per mask cell
    for Symbolic operands.  ``margin`` only widens the valuation fast path
    for clearly-inside nets.
    """
    center, y = _coerce(center), _coerce(y)
    d = (y - center).abs()
    if isinstance(d, Symbolic):
        z = _symbolic_binary("sub", Symbolic.alpha(float(r)), d)
        return compare(z, Symbolic.zero()) is Order.GT
    v = d.valuation()
    if v == math.inf:
        return True
    if v >= r + margin:
        return True
    tail = d.grid.tail_slice()
    vals = d.values[tail]
    log_eps = np.log(d.grid.points[tail])
    logs = d._logs()
    with np.errstate(divide="ignore"):
        lv = (logs[tail] if logs is not None
              else np.where(vals > 0, np.log(np.where(vals > 0, vals, 1.0)),
                            -np.inf))
    return bool(np.all(lv < r * log_eps))


# ---------------------------------------------------------------------------
# interleaving


@dataclass(frozen=True)
class Interleaving:
    """Finite family (e_i, x_i) with complete orthogonal masks."""

    parts: tuple

    def validate(self):
        check_family([e for e, _x in self.parts])


def interleave(parts) -> GeneralizedNumber:
    """Entertwine sum(e_i * x_i); multiplying by e_j recovers e_j * x_j."""
    il = parts if isinstance(parts, Interleaving) else Interleaving(tuple(parts))
    il.validate()
    total = None
    for e, x in il.parts:
        piece = _coerce(x) * Symbolic.from_mask(e)
        total = piece if total is None else total + piece
    return total
