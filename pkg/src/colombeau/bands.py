"""Scale-band idempotents: {0,1}-valued nets with computable densities.

A band is B_k = (q^{k+1}, q^k] with q = 1/2; the position of eps inside its
band is linear in eps.  Band k is divided into L * 2**k equal cells (the
per-band doubling keeps patterns equidistributed as k grows), and an
idempotent is described by which (band class mod P, cell class mod L)
pairs are occupied, plus optional per-band overrides for transients.

This class of generators is closed under products, complements and unions
(exactly, by lifting both moduli to lcm), has O(1) membership, exact
equality after normalization, and closed-form band measures, which is what
makes the linear density at 0 computable with exact brackets.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

Q = Fraction(1, 2)  # band ratio; fixed across the package

_P_CAP = 64
_L_CAP = 4096


def band_index(eps: float) -> int:
    """Index k with q^{k+1} < eps <= q^k, exact for every float."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    m, ex = math.frexp(eps)  # eps = m * 2**ex, m in [0.5, 1)
    return 1 - ex if m == 0.5 else -ex


def band_position(eps: float, k: int) -> Fraction:
    """Linear position of eps inside band k, in (0, 1]; exact."""
    return Fraction(eps) * (1 << (k + 1)) - 1


class Idempotent:
    """Characteristic function of a scale-band generated subset of (0, 1]."""

    __slots__ = ("P", "L", "table", "heads", "_hash")

    def __init__(self, P: int, L: int, table, heads=None, _normalized=False):
        if P < 1 or P > _P_CAP or L < 1 or L > _L_CAP:
            raise ValueError("band/cell periods out of range")
        tab = np.asarray(table, dtype=bool).reshape(P, L).copy()
        self.P = P
        self.L = L
        self.table = tab
        self.heads = dict(heads) if heads else {}
        if not _normalized:
            self._normalize()
        self.table.setflags(write=False)
        self._hash = None

    # -- construction -------------------------------------------------

    @staticmethod
    def zero() -> "Idempotent":
        return Idempotent(1, 1, [[False]])

    @staticmethod
    def one() -> "Idempotent":
        return Idempotent(1, 1, [[True]])

    @staticmethod
    def band_classes(period: int, full: "set[int] | list[int]",
                     heads=None) -> "Idempotent":
        """Full bands at band indices congruent to ``full`` mod ``period``."""
        tab = np.zeros((period, 1), dtype=bool)
        for r in full:
            tab[r % period, 0] = True
        return Idempotent(period, 1, tab, heads)

    @staticmethod
    def cell_classes(modulus: int, faces: "set[int] | list[int]") -> "Idempotent":
        """Cells congruent to ``faces`` mod ``modulus`` in every band."""
        tab = np.zeros((1, modulus), dtype=bool)
        for c in faces:
            tab[0, c % modulus] = True
        return Idempotent(1, modulus, tab)

    @staticmethod
    def family(m: int, refine: str = "double-per-band") -> "list[Idempotent]":
        """Complete orthogonal family of m idempotents.

        ``double-per-band`` assigns cells cyclically to the m members (each
        gets density 1/m); ``band-cyclic`` assigns whole bands cyclically
        (orthogonal and complete, but the density limit does not exist).
        """
        if refine == "double-per-band":
            return [Idempotent.cell_classes(m, [i]) for i in range(m)]
        if refine == "band-cyclic":
            return [Idempotent.band_classes(m, [i]) for i in range(m)]
        raise ValueError("unknown refine mode %r" % refine)

    @staticmethod
    def from_spec(spec: dict) -> "Idempotent":
        """Build from the documented JSON form.

        ``{"bands": {"q": 0.5, "pattern": [[lo, hi], ...],
                     "refine": "double-per-band"}}`` quantizes the base
        pattern to cell classes; ``{"bands": {"period": P, "full": [...]}}``
        selects whole band classes.
        """
        body = spec.get("bands", spec)
        if Fraction(str(body.get("q", "0.5"))) != Q:
            raise ValueError("only q = 1/2 band generators are supported")
        if "pattern" in body:
            if body.get("refine", "double-per-band") != "double-per-band":
                raise ValueError("only double-per-band refinement is supported")
            ivals = [(Fraction(str(lo)).limit_denominator(_L_CAP),
                      Fraction(str(hi)).limit_denominator(_L_CAP))
                     for lo, hi in body["pattern"]]
            L = 1
            for lo, hi in ivals:
                L = math.lcm(L, lo.denominator, hi.denominator)
            if L > _L_CAP:
                raise ValueError("pattern too fine; cell modulus cap exceeded")
            faces = set()
            for lo, hi in ivals:
                faces.update(range(int(lo * L), int(hi * L)))
            return Idempotent.cell_classes(L, faces)
        return Idempotent.band_classes(int(body["period"]),
                                       [int(r) for r in body["full"]])

    # -- canonical form -----------------------------------------------

    def _normalize(self):
        # Drop head rows equal to the periodic row they shadow.
        for k in sorted(self.heads):
            row = np.zeros(self.L, dtype=bool)
            row[[c % self.L for c in self.heads[k]]] = True
            if np.array_equal(row, self.table[k % self.P]):
                del self.heads[k]
            else:
                self.heads[k] = frozenset(c % self.L for c in self.heads[k])
        # Minimal band period.
        for Pn in sorted(d for d in range(1, self.P + 1) if self.P % d == 0):
            if all(np.array_equal(self.table[r], self.table[r % Pn])
                   for r in range(self.P)):
                self.table = self.table[:Pn].copy()
                self.P = Pn
                break
        # Minimal cell modulus: L reduces to Ln when each row is constant on
        # consecutive blocks of size L // Ln (the cell-coarsening fibers).
        for Ln in sorted(d for d in range(1, self.L + 1) if self.L % d == 0):
            blk = self.L // Ln
            view = self.table.reshape(self.P, Ln, blk)
            if np.all(view.all(axis=2) == view.any(axis=2)):
                ok = True
                for k, hs in self.heads.items():
                    row = np.zeros(self.L, dtype=bool)
                    row[list(hs)] = True
                    hv = row.reshape(Ln, blk)
                    if not np.all(hv.all(axis=1) == hv.any(axis=1)):
                        ok = False
                        break
                if not ok:
                    continue
                self.table = view.all(axis=2).copy()
                self.heads = {k: frozenset(c for c in range(Ln)
                                           if any((c * blk + i) in hs
                                                  for i in range(blk)))
                              for k, hs in self.heads.items()}
                self.L = Ln
                break

    # -- basics ---------------------------------------------------------

    def _row(self, k: int) -> np.ndarray:
        if k in self.heads:
            row = np.zeros(self.L, dtype=bool)
            row[list(self.heads[k])] = True
            return row
        return self.table[k % self.P]

    def row_fraction(self, k: int) -> Fraction:
        return Fraction(int(self._row(k).sum()), self.L)

    def contains(self, eps: float) -> bool:
        k = band_index(eps)
        row = self._row(k)
        if row.all():
            return True
        if not row.any():
            return False
        t = band_position(eps, k)
        n_cells = self.L << k
        c = int(math.ceil(t * n_cells)) - 1
        return bool(row[c % self.L])

    def indicator(self, eps_points) -> np.ndarray:
        return np.array([1.0 if self.contains(float(e)) else 0.0
                         for e in np.asarray(eps_points, dtype=float)])

    def indicator_fast(self, eps_array: np.ndarray) -> np.ndarray:
        """Vectorized float indicator; may misclassify exact cell boundaries.

        Intended for large oracle grids where boundary points have measure
        zero; the grid-exact path is ``indicator``.
        """
        eps = np.asarray(eps_array, dtype=float)
        k = np.floor(-np.log2(eps) - 1e-12).astype(np.int64)
        k = np.maximum(k, 0)
        t = eps * np.exp2(k + 1.0) - 1.0
        cells = np.ceil(t * self.L * np.exp2(np.minimum(k, 40).astype(float))) - 1.0
        cls = np.mod(cells.astype(np.int64), self.L)
        out = self.table[np.mod(k, self.P), cls]
        for kh, hs in self.heads.items():
            sel = k == kh
            if sel.any():
                out = out.copy()
                out[sel] = np.isin(cls[sel], list(hs))
        return out.astype(float)

    def is_zero(self) -> bool:
        return not self.table.any() and not any(self.heads.values())

    def is_one(self) -> bool:
        return bool(self.table.all()) and all(
            len(h) == self.L for h in self.heads.values())

    def is_trivial(self) -> bool:
        return self.is_zero() or self.is_one()

    # -- boolean algebra -------------------------------------------------

    def _lift(self, P: int, L: int):
        """Table and heads re-expressed with band period P and modulus L."""
        assert P % self.P == 0 and L % self.L == 0
        blk = L // self.L
        cols = (np.arange(L) // blk) % self.L
        tab = self.table[np.arange(P).reshape(-1, 1) % self.P, cols]
        heads = {}
        for k, hs in self.heads.items():
            heads[k] = frozenset(s for s in range(L) if (s // blk) % self.L in hs)
        return tab, heads

    @staticmethod
    def _combine(a: "Idempotent", b: "Idempotent", op) -> "Idempotent":
        P = math.lcm(a.P, b.P)
        L = math.lcm(a.L, b.L)
        ta, ha = a._lift(P, L)
        tb, hb = b._lift(P, L)
        tab = op(ta, tb)
        heads = {}
        for k in set(ha) | set(hb):
            ra = np.zeros(L, dtype=bool)
            if k in ha:
                ra[list(ha[k])] = True
            else:
                ra = ta[k % P].copy()
            rb = np.zeros(L, dtype=bool)
            if k in hb:
                rb[list(hb[k])] = True
            else:
                rb = tb[k % P].copy()
            heads[k] = frozenset(np.nonzero(op(ra, rb))[0].tolist())
        return Idempotent(P, L, tab, heads)

    def __mul__(self, other):
        if not isinstance(other, Idempotent):
            return NotImplemented
        return Idempotent._combine(self, other, np.logical_and)

    def __or__(self, other):
        return Idempotent._combine(self, other, np.logical_or)

    def complement(self) -> "Idempotent":
        heads = {k: frozenset(c for c in range(self.L) if c not in hs)
                 for k, hs in self.heads.items()}
        return Idempotent(self.P, self.L, ~self.table, heads)

    def __invert__(self):
        return self.complement()

    def __eq__(self, other):
        if not isinstance(other, Idempotent):
            return NotImplemented
        return (self.P == other.P and self.L == other.L
                and np.array_equal(self.table, other.table)
                and self.heads == other.heads)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.P, self.L, self.table.tobytes(),
                               tuple(sorted(self.heads.items()))))
        return self._hash

    def __repr__(self):
        if self.is_one():
            return "Idempotent.one()"
        if self.is_zero():
            return "Idempotent.zero()"
        rows = ["".join("1" if v else "0" for v in self.table[r])
                for r in range(self.P)]
        return "Idempotent(P=%d, L=%d, rows=%s%s)" % (
            self.P, self.L, "|".join(rows),
            ", heads=%d" % len(self.heads) if self.heads else "")

    def describe(self) -> str:
        return repr(self)

    # -- measures ----------------------------------------------------------

    def band_measure(self, k: int) -> Fraction:
        """Lebesgue measure of the pattern inside band k (width q^{k+1})."""
        return self.row_fraction(k) * Q ** (k + 1)

    def partial_band_measure(self, k: int, t: Fraction) -> Fraction:
        """Measure of the pattern within band k at positions (0, t]."""
        row = self._row(k)
        if t <= 0:
            return Fraction(0)
        t = min(Fraction(t), Fraction(1))
        width = Q ** (k + 1)
        if row.all():
            return t * width
        if not row.any():
            return Fraction(0)
        n_cells = self.L << k
        x = t * n_cells
        full = int(x)  # cells (0 .. full-1] are fully below t
        frac = x - full
        per_cycle = int(row.sum())
        count = Fraction((full // self.L) * per_cycle
                         + int(row[: full % self.L].sum()))
        if frac > 0 and row[full % self.L]:
            count += frac
        return count / n_cells * width

    def tail_measure(self, k_from: int) -> Fraction:
        """Exact measure of the pattern over all bands k >= k_from."""
        total = Fraction(0)
        k = k_from
        horizon = max(self.heads, default=-1)
        while k <= horizon:
            total += self.band_measure(k)
            k += 1
        # Periodic tail: geometric per band class.
        ratio = Q ** self.P
        for r in range(self.P):
            frac = Fraction(int(self.table[r].sum()), self.L)
            if frac == 0:
                continue
            k_r = k + (r - k) % self.P
            total += frac * Q ** (k_r + 1) / (1 - ratio)
        return total

    def measure_up_to(self, k: int, t: Fraction) -> Fraction:
        """Measure of the pattern inside (0, eta] with eta at position t of band k."""
        return self.tail_measure(k + 1) + self.partial_band_measure(k, t)


def density(e: Idempotent, band_range=(4, 44), positions_per_band: int = 17,
            tol: float = 1e-3) -> dict:
    """Linear density of the support at 0, with exact brackets.

    Evaluates the running average measure(S ∩ (0, eta]) / eta on an eta grid
    of within-band positions over ``band_range``; ``lower``/``upper`` bracket
    the running average over the deeper half of the probed bands, and
    ``defined`` records whether they agree to ``tol`` (a non-existent limit,
    e.g. unrefined alternating bands, keeps them apart).
    """
    j0, j1 = band_range
    mid = (j0 + j1) // 2
    lo = None
    hi = None
    value_at_depth = None
    for k in range(j0, j1 + 1):
        for i in range(1, positions_per_band + 1):
            t = Fraction(i, positions_per_band)
            eta = Q ** (k + 1) * (1 + t)
            ratio = e.measure_up_to(k, t) / eta
            if k >= mid:
                lo = ratio if lo is None else min(lo, ratio)
                hi = ratio if hi is None else max(hi, ratio)
            value_at_depth = ratio
    lo_f, hi_f = float(lo), float(hi)
    return {
        "value": float((lo + hi) / 2),
        "lower": lo_f,
        "upper": hi_f,
        "defined": bool(hi_f - lo_f < tol),
        "deepest": float(value_at_depth),
    }


def check_family(parts: "list[Idempotent]") -> None:
    """Raise unless ``parts`` is complete and mutually orthogonal."""
    from .errors import IncompleteFamily, NotOrthogonal

    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if not (parts[i] * parts[j]).is_zero():
                raise NotOrthogonal("parts %d and %d overlap" % (i, j))
    union = parts[0]
    for p in parts[1:]:
        union = union | p
    if not union.is_one():
        raise IncompleteFamily("family does not cover every scale")
