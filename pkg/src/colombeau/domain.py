"""Open domains with their compact exhaustions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomain

# A net counts as compactly supported when it keeps this much distance to
# the boundary at every grid scale.
MIN_BOUNDARY_MARGIN = 1e-9


@dataclass(frozen=True)
class DomainSpec:
    """Open interval with the exhaustion O_m = {dist(x, bd) > 1/m, |x| < m}."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("empty domain")

    def omega(self, m: int):
        """The m-th exhaustion interval, or None when it is empty."""
        lo = max(self.lo + 1.0 / m, -float(m))
        hi = min(self.hi - 1.0 / m, float(m))
        return (lo, hi) if lo < hi else None

    def measure(self, m: int) -> float:
        om = self.omega(m)
        return 0.0 if om is None else om[1] - om[0]

    def smallest_m_containing(self, lo: float, hi: float, m_max: int = 64):
        for m in range(1, m_max + 1):
            om = self.omega(m)
            if om and om[0] < lo and hi < om[1]:
                return m
        return None

    def check_net_inside(self, xs: np.ndarray):
        """Reject nets that leave every exhaustion set."""
        xs = np.asarray(xs, dtype=float)
        d = np.minimum(xs - self.lo, self.hi - xs)
        if np.any(d <= MIN_BOUNDARY_MARGIN) or np.any(np.abs(xs) > 1e9):
            raise OutOfDomain(
                "net approaches the boundary of (%g, %g)" % (self.lo, self.hi))

    def lattice(self, m: int, density: int) -> np.ndarray:
        om = self.omega(m)
        if om is None:
            return np.empty(0)
        n = max(8, int(round((om[1] - om[0]) * density)) + 1)
        return np.linspace(om[0], om[1], n)
