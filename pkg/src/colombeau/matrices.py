"""Square matrices over the generalized numbers and the det-unit test."""

from __future__ import annotations

import numpy as np

from .gnum import Classification, GeneralizedNumber, Sampled, Symbolic, classify, _coerce


class GMatrix:
    """n x n array of generalized numbers (shared grid for sampled entries)."""

    def __init__(self, entries):
        rows = [[_coerce(x) for x in row] for row in entries]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        self.entries = rows
        self.n = n
        grids = {id(x.grid) for row in rows for x in row
                 if isinstance(x, Sampled)}
        if len(grids) > 1:
            sample = next(x for row in rows for x in row
                          if isinstance(x, Sampled))
            if not all(x.grid.same_points(sample.grid) for row in rows
                       for x in row if isinstance(x, Sampled)):
                raise ValueError("sampled entries must share one grid")

    def det(self) -> GeneralizedNumber:
        """Exact cofactor expansion (ring ops handle both representations)."""
        if self.n > 4 and self._all_sampled():
            return self._det_pointwise()
        return _cofactor_det(self.entries)

    def _all_sampled(self):
        return all(isinstance(x, Sampled) for row in self.entries for x in row)

    def _det_pointwise(self) -> Sampled:
        grid = self.entries[0][0].grid
        stack = np.empty((len(grid), self.n, self.n))
        for i, row in enumerate(self.entries):
            for j, x in enumerate(row):
                stack[:, i, j] = x.values
        return Sampled(grid, np.linalg.det(stack))


def _cofactor_det(rows) -> GeneralizedNumber:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = None
    for j in range(n):
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        piece = rows[0][j] * _cofactor_det(minor)
        if j % 2:
            piece = -piece
        total = piece if total is None else total + piece
    return total


def det_unit(matrix: GMatrix) -> dict:
    """Determinant plus invertibility verdict per the unit criterion."""
    d = matrix.det()
    kind = classify(d)
    return {"invertible": kind is Classification.UNIT,
            "det": d, "classification": kind}
