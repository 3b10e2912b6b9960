"""Tail estimators for scale exponents of sampled nets.

The scale exponent of a net x is a liminf of log_eps |x(eps)|; on a finite
grid we use the tail-window minimum as a conservative proxy.  Two exact
fast paths are layered on top:

* asymptotically constant tails report exponent 0 exactly (true for every
  nonzero constant, where the raw minimum is biased by ln|c| / ln eps);
* clean power-law tails report the least-squares slope, which is exact for
  monomial nets and unbiased under constant factors.

The least-squares slope is always carried along as a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotModerate

# Defaults shared across the package.
V_NEGLIGIBLE = 40.0   # exponents at or beyond this count as zero at desk scale
V_MAX = 100.0         # tails steeper than -V_MAX are rejected as non-moderate

_CONST_RATIO = 1.05       # max/min ratio under which a tail counts as constant
_POWER_RESIDUAL = 0.02    # max |log residual| for the clean power-law path


@dataclass(frozen=True)
class ValuationReport:
    value: float              # the estimate (may be +inf)
    lsq_slope: float          # diagnostic regression slope (nan if unusable)
    tail_min: float           # raw tail-window minimum (nan if unusable)
    n_points: int             # nonzero tail points that entered the estimate
    method: str               # "exact-zero" | "constant" | "power" | "tail-min"


def _lsq_slope(log_eps: np.ndarray, log_abs: np.ndarray):
    if log_eps.size < 2:
        return float("nan"), np.zeros_like(log_abs)
    a = np.vstack([log_eps, np.ones_like(log_eps)]).T
    coef, *_ = np.linalg.lstsq(a, log_abs, rcond=None)
    resid = log_abs - a @ coef
    return float(coef[0]), resid


def valuation_report(eps: np.ndarray, abs_values: np.ndarray,
                     log_abs: np.ndarray | None = None,
                     tail: slice | None = None,
                     v_negl: float = V_NEGLIGIBLE,
                     v_max: float = V_MAX) -> ValuationReport:
    """Estimate the scale exponent of |x(eps)| over the grid tail.

    ``log_abs`` supplies exact logs for entries whose linear value
    underflowed to zero; entries that are genuinely zero keep -inf there
    and are skipped, matching the liminf convention.
    """
    eps = np.asarray(eps, dtype=float)
    av = np.asarray(abs_values, dtype=float)
    if tail is None:
        n = eps.size
        tail = slice(n - max(4, n // 2), n)
    te = eps[tail]
    ta = av[tail]
    if np.any(np.isinf(ta)) or np.any(np.isnan(ta)):
        raise NotModerate("net overflows the float range on the tail")
    if log_abs is not None:
        tl = np.asarray(log_abs, dtype=float)[tail]
    else:
        with np.errstate(divide="ignore"):
            tl = np.where(ta > 0.0, np.log(np.where(ta > 0.0, ta, 1.0)), -np.inf)
    keep = np.isfinite(tl)
    if not np.any(keep):
        # All-zero tail: indistinguishable from the zero element at grid depth.
        return ValuationReport(float("inf"), float("nan"), float("nan"), 0,
                               "exact-zero")
    log_eps = np.log(te[keep])
    log_v = tl[keep]
    slopes = log_v / log_eps
    tail_min = float(np.min(slopes))
    lsq, resid = _lsq_slope(log_eps, log_v)

    if tail_min < -v_max:
        raise NotModerate(
            "tail slope %.3f below the moderateness floor -%.0f"
            % (tail_min, v_max))

    spread = float(np.max(log_v) - np.min(log_v))
    if spread <= np.log(_CONST_RATIO):
        return ValuationReport(0.0, lsq, tail_min, int(keep.sum()), "constant")
    if log_eps.size >= 3 and np.max(np.abs(resid)) <= _POWER_RESIDUAL:
        value = lsq
        if value >= v_negl:
            value = float("inf")
        return ValuationReport(float(value), lsq, tail_min, int(keep.sum()),
                               "power")
    value = tail_min
    if value >= v_negl:
        value = float("inf")
    return ValuationReport(float(value), lsq, tail_min, int(keep.sum()),
                           "tail-min")


@dataclass(frozen=True)
class SlopeFit:
    slope: float          # +inf means "vanishes at working precision"
    n_points: int
    saturated: bool       # True when the noise floor truncated the window


def slope_fit(eps: np.ndarray, values: np.ndarray,
              floors: np.ndarray | float = 0.0) -> SlopeFit:
    """Log-log slope of |values| vs eps over the credible window.

    ``floors`` is a per-point noise floor (e.g. from quadrature amplitude);
    points at or below their floor are excluded.  With fewer than three
    credible points the data is flat zero at working precision and the
    slope is reported as +inf.
    """
    eps = np.asarray(eps, dtype=float)
    av = np.abs(np.asarray(values))
    fl = np.broadcast_to(np.asarray(floors, dtype=float), av.shape)
    keep = av > np.maximum(fl, 0.0)
    if keep.sum() < 3:
        return SlopeFit(float("inf"), int(keep.sum()), True)
    log_eps = np.log(eps[keep])
    log_v = np.log(av[keep])
    if np.max(log_v) - np.min(log_v) <= np.log(_CONST_RATIO):
        return SlopeFit(0.0, int(keep.sum()), bool((~keep).sum()))
    slope, _ = _lsq_slope(log_eps, log_v)
    return SlopeFit(float(slope), int(keep.sum()), bool((~keep).sum()))
