"""Smooth closures, compactly supported test functions, and mollifiers.

Derivatives are exact closures, never finite differences; finite
differences appear only as validation oracles in the tests.  Generic
expressions go through sympy; the bump family uses a polynomial
recurrence because symbolic derivatives of exp(-1/(1-u^2)) blow up
combinatorially at the orders the sharp seminorms need.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import sympy as sp

from .errors import IllConditioned, OrderExceeded
from .quadrature import PanelGrid, panel_edges

_X = sp.Symbol("x")

MAX_ORDER = 10


class SmoothClosure:
    """A C-infinity function with vectorized derivative closures."""

    def __init__(self, expr: sp.Expr, var: sp.Symbol = _X,
                 max_order: int = MAX_ORDER):
        self.expr = expr
        self.var = var
        self.max_order = max_order
        self._fns = {}
        self._derivs = {0: expr}

    def _fn(self, k: int):
        if k > self.max_order:
            raise OrderExceeded("closure order %d exceeds %d"
                                % (k, self.max_order))
        if k not in self._fns:
            if k not in self._derivs:
                prev = max(d for d in self._derivs if d <= k)
                d = self._derivs[prev]
                for j in range(prev, k):
                    d = sp.diff(d, self.var)
                    self._derivs[j + 1] = d
            self._fns[k] = sp.lambdify(self.var, self._derivs[k],
                                       modules="numpy")
        return self._fns[k]

    def __call__(self, x, k: int = 0):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore",
                         under="ignore"):
            out = np.asarray(self._fn(k)(x), dtype=float)
        if out.shape != x.shape:
            out = np.broadcast_to(out, x.shape).copy()
        return np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0)


class BumpClosure:
    """q(u) * exp(-1/(1-u^2)) with u = (x-c)/w, supported on |u| < 1.

    The k-th derivative is N_k(u) / (1-u^2)^{2k} * exp(-1/(1-u^2)) / w^k
    with N_k given by the recurrence
    N_{k+1} = N_k' (1-u^2)^2 + 4 k u N_k (1-u^2) - 2 u N_k,
    evaluated with plain polynomial arithmetic.
    """

    def __init__(self, center: float = 0.0, width: float = 1.0, poly=(1.0,),
                 max_order: int = MAX_ORDER):
        self.center = float(center)
        self.width = float(width)
        self.max_order = max_order
        P = np.polynomial.Polynomial
        self._one_minus_u2 = P([1.0, 0.0, -1.0])
        self._N = [P(list(poly))]

    def _numerator(self, k: int):
        P = np.polynomial.Polynomial
        while len(self._N) <= k:
            j = len(self._N) - 1
            N = self._N[j]
            omu = self._one_minus_u2
            nxt = N.deriv() * omu ** 2 + P([0.0, 4.0 * j]) * N * omu \
                - P([0.0, 2.0]) * N
            self._N.append(nxt)
        return self._N[k]

    def __call__(self, x, k: int = 0):
        if k > self.max_order:
            raise OrderExceeded("closure order %d exceeds %d"
                                % (k, self.max_order))
        x = np.asarray(x, dtype=float)
        u = (x - self.center) / self.width
        out = np.zeros(x.shape, dtype=float)
        inside = np.abs(u) < 1.0
        if np.any(inside):
            ui = u[inside]
            omu2 = 1.0 - ui * ui
            with np.errstate(divide="ignore", invalid="ignore", over="ignore",
                             under="ignore"):
                core = np.exp(-1.0 / omu2)
                val = self._numerator(k)(ui) * omu2 ** (-2 * k) * core
            out[inside] = np.nan_to_num(val, nan=0.0, posinf=0.0, neginf=0.0) \
                / self.width ** k
        return out


class TestFunction:
    """Smooth compactly supported probe with a support descriptor."""

    def __init__(self, closure, support, exact_integral=None, label=""):
        self._closure = closure
        self.support = (float(support[0]), float(support[1]))
        self.exact_integral = exact_integral
        self.label = label

    def __call__(self, x, k: int = 0):
        return self._closure(x, k)

    @staticmethod
    def bump(center: float = 0.0, width: float = 1.0,
             scale: float = 1.0) -> "TestFunction":
        return TestFunction(BumpClosure(center, width, (scale,)),
                            (center - width, center + width),
                            label="bump(c=%g,w=%g)" % (center, width))

    @staticmethod
    def poly_window(center: float, width: float, coeffs) -> "TestFunction":
        """Polynomial in the scaled offset, windowed by the standard bump."""
        return TestFunction(BumpClosure(center, width, tuple(coeffs)),
                            (center - width, center + width),
                            label="polywin(c=%g,w=%g)" % (center, width))

    def integral_against(self, other, n_panels=32) -> float:
        grid = PanelGrid(panel_edges(*self.support, n_panels), 12)
        return grid.integrate(self(grid.x) * other(grid.x))


def default_probe_suite(lo: float = -2.0, hi: float = 2.0) -> list[TestFunction]:
    """8 bumps with varied centers/widths plus 4 polynomial-windowed probes."""
    span = hi - lo
    mid = 0.5 * (lo + hi)
    layout = [(mid, 0.45 * span), (mid, 0.2 * span),
              (lo + 0.3 * span, 0.25 * span), (hi - 0.3 * span, 0.25 * span),
              (lo + 0.2 * span, 0.15 * span), (hi - 0.2 * span, 0.15 * span),
              (mid - 0.1 * span, 0.32 * span), (mid + 0.1 * span, 0.32 * span)]
    probes = [TestFunction.bump(c, w) for c, w in layout]
    probes += [TestFunction.poly_window(mid, 0.4 * span, [1.0, 0.8]),
               TestFunction.poly_window(mid, 0.35 * span, [0.5, 0.0, 1.0]),
               TestFunction.poly_window(mid - 0.05 * span, 0.3 * span,
                                        [1.0, -0.6, 0.3]),
               TestFunction.poly_window(mid + 0.05 * span, 0.3 * span,
                                        [0.7, 0.4, -0.2, 0.1])]
    return probes


class Mollifier(BumpClosure):
    """Even bump times a polynomial in z**2 with prescribed vanishing moments.

    Moments 1..Q vanish (odd ones by symmetry) and the integral is one; the
    polynomial coefficients solve the bump-moment Gram system at ~1e-12
    residual.
    """

    def __init__(self, Q: int = 4, R: float = 1.0):
        if Q < 0 or Q % 2:
            raise ValueError("vanishing-moment order must be even and >= 0")
        self.Q = Q
        self.R = float(R)
        n = Q // 2 + 1
        mu = _bump_even_moments(self.R, 4 * n)
        gram = np.array([[mu[2 * (i + j)] for i in range(n)] for j in range(n)])
        cond = np.linalg.cond(gram)
        if cond > 1e12:
            raise IllConditioned(
                "moment system condition %.2e; lower Q or widen R" % cond)
        rhs = np.zeros(n)
        rhs[0] = 1.0
        coeffs = np.linalg.solve(gram, rhs)
        poly = np.zeros(2 * n - 1)
        poly[::2] = coeffs
        super().__init__(0.0, self.R, tuple(poly))
        self.poly_coeffs = coeffs
        grid = PanelGrid(panel_edges(-self.R, self.R, 64), 12)
        vals = self(grid.x)
        self.l1_norm = grid.integrate_abs(vals)
        self.sup_norm = float(np.max(np.abs(vals)))
        self.at_zero = float(self(np.array([0.0]))[0])
        self.moment_residuals = [
            grid.integrate(vals * grid.x ** m) - (1.0 if m == 0 else 0.0)
            for m in range(Q + 1)]

    def primitive(self) -> "PrimitiveClosure":
        return PrimitiveClosure(self)


@lru_cache(maxsize=None)
def _bump_even_moments(R: float, up_to: int):
    grid = PanelGrid(panel_edges(-R, R, 64), 16)
    bump = BumpClosure(0.0, R)
    vals = bump(grid.x)
    return {m: grid.integrate(vals * grid.x ** m)
            for m in range(0, up_to + 1, 2)}


class PrimitiveClosure:
    """Antiderivative of a mollifier: P(z) = integral from -R to z.

    P is tabulated once on a dense panel grid; derivatives of order k >= 1
    delegate to the mollifier's exact closures.
    """

    def __init__(self, rho: Mollifier, n_panels: int = 512):
        self.rho = rho
        self.R = rho.R
        self.max_order = rho.max_order + 1
        self._grid = PanelGrid(panel_edges(-self.R, self.R, n_panels), 6)
        self._cum = self._grid.cumulative(rho(self._grid.x))
        self.total = self._grid.cumulative_at_edges(rho(self._grid.x))[-1]

    def __call__(self, z, k: int = 0):
        z = np.asarray(z, dtype=float)
        if k > 0:
            return self.rho(z, k - 1)
        out = np.empty_like(z)
        below = z <= -self.R
        above = z >= self.R
        mid = ~(below | above)
        out[below] = 0.0
        out[above] = self.total
        if np.any(mid):
            out[mid] = self._grid.interpolate(self._cum, z[mid])
        return out


def expression_closure(expr_or_str, max_order: int = MAX_ORDER) -> SmoothClosure:
    """Sympy-backed closure for generic smooth expressions in one variable."""
    if isinstance(expr_or_str, SmoothClosure):
        return expr_or_str
    expr = sp.sympify(expr_or_str) if isinstance(expr_or_str, str) else expr_or_str
    syms = list(expr.free_symbols)
    if len(syms) > 1:
        raise ValueError("expected at most one free symbol, got %s" % syms)
    var = syms[0] if syms else _X
    return SmoothClosure(expr, var=var, max_order=max_order)
