"""Finite epsilon grids: the desk-scale sample of the scale interval (0, 1]."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class EpsilonGrid:
    """Strictly decreasing finite sample of scales in (0, 1].

    The default is geometric, eps_k = 0.5 * 0.5**k for 48 points, which
    bottoms out near 3.5e-15.  ``tail_window`` is the fraction of the
    smallest points used for asymptotic fits.
    """

    points: np.ndarray
    tail_window: float = 0.5

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 8:
            raise ValueError("grid needs at least 8 epsilon points")
        if np.any(pts <= 0.0) or np.any(pts > 1.0):
            raise ValueError("grid points must lie in (0, 1]")
        if np.any(np.diff(pts) >= 0.0):
            raise ValueError("grid points must be strictly decreasing")
        if not 0.0 < self.tail_window <= 1.0:
            raise ValueError("tail_window must lie in (0, 1]")
        pts.setflags(write=False)

    @staticmethod
    def geometric(eps0: float = 0.5, ratio: float = 0.5, count: int = 48,
                  tail_window: float = 0.5) -> "EpsilonGrid":
        pts = eps0 * ratio ** np.arange(count)
        return EpsilonGrid(pts, tail_window)

    @staticmethod
    def default() -> "EpsilonGrid":
        return EpsilonGrid.geometric()

    def __len__(self) -> int:
        return self.points.size

    @property
    def log_points(self) -> np.ndarray:
        return np.log(self.points)

    def tail_slice(self) -> slice:
        """Index slice of the smallest points used for asymptotic fits."""
        n = self.points.size
        start = n - max(4, int(round(self.tail_window * n)))
        return slice(max(0, start), n)

    def same_points(self, other: "EpsilonGrid") -> bool:
        return self.points.shape == other.points.shape and np.array_equal(
            self.points, other.points)

    def align_with(self, other: "EpsilonGrid"):
        """Indices of exactly matching epsilon values (no interpolation).

        Returns (grid, idx_self, idx_other).  Raises GridMismatch when the
        intersection is too small to support tail fits.
        """
        from .errors import GridMismatch

        if self.same_points(other):
            idx = np.arange(len(self))
            return self, idx, idx
        common, ia, ib = np.intersect1d(self.points, other.points,
                                        return_indices=True)
        if common.size < 8:
            raise GridMismatch(
                "grids share %d epsilon points; need at least 8" % common.size)
        order = np.argsort(common)[::-1]
        merged = EpsilonGrid(common[order],
                             min(self.tail_window, other.tail_window))
        return merged, ia[order], ib[order]

    def describe(self) -> dict:
        return {
            "count": int(len(self)),
            "eps_max": float(self.points[0]),
            "eps_min": float(self.points[-1]),
            "tail_window": float(self.tail_window),
        }


def default_grid() -> EpsilonGrid:
    return EpsilonGrid.default()
