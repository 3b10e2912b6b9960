"""Band idempotents: membership, algebra, densities against closed forms."""

import math

import numpy as np
import pytest

from colombeau.bands import (Idempotent, band_index, band_position,
                             check_family, density)
from colombeau.errors import IncompleteFamily, NotOrthogonal


def test_band_index_exact_at_boundaries():
    assert band_index(1.0) == 0
    assert band_index(0.5) == 1
    assert band_index(0.25) == 2
    assert band_index(0.3) == 1
    assert band_index(2.0 ** -40) == 40
    assert band_position(0.5, 1) == 1
    assert band_position(0.375, 1) == 0.5


def test_boolean_algebra_exact():
    dice = Idempotent.family(6)
    e = dice[0]
    assert (e * e) == e
    assert (e * e.complement()).is_zero()
    assert (e | e.complement()).is_one()
    assert (dice[0] | dice[1]) * dice[2] == Idempotent.zero()
    # equality across resolutions after normalization
    assert Idempotent.cell_classes(2, [0]) == Idempotent.cell_classes(4, [0, 1])
    par = Idempotent.band_classes(2, [0])
    assert par.complement() == Idempotent.band_classes(2, [1])


def test_family_invariants():
    check_family(Idempotent.family(6))
    with pytest.raises(NotOrthogonal):
        check_family([Idempotent.one(), Idempotent.one()])
    with pytest.raises(IncompleteFamily):
        check_family([Idempotent.cell_classes(3, [0]),
                      Idempotent.cell_classes(3, [1])])


def test_dice_densities_are_sixths():
    # closed-form oracle: each refined face has measure 1/6 of every band,
    # so the running average is exactly 1/6 at band boundaries
    for e in Idempotent.family(6):
        d = density(e)
        assert d["defined"]
        assert abs(d["value"] - 1.0 / 6.0) < 1e-3
    total = sum(density(e)["value"] for e in Idempotent.family(6))
    assert abs(total - 1.0) < 6e-3


def test_crude_alternating_band_density_undefined():
    # oracle: measure evaluated at eta = 2^-2k gives 2/3, at 2^-2k-1 gives 1/3
    d = density(Idempotent.band_classes(2, [0]))
    assert not d["defined"]
    assert abs(d["lower"] - 1.0 / 3.0) < 1e-6
    assert abs(d["upper"] - 2.0 / 3.0) < 1e-6


def test_trivial_density():
    d = density(Idempotent.one())
    assert d["defined"] and abs(d["value"] - 1.0) < 1e-12


def test_membership_against_fine_oracle():
    # vectorized indicator vs exact membership on a large refinement
    e = Idempotent.cell_classes(6, [2])
    rng = np.random.default_rng(7)
    eps = rng.uniform(1e-6, 1.0, size=4000)
    fast = e.indicator_fast(eps)
    exact = np.array([1.0 if e.contains(float(x)) else 0.0 for x in eps])
    # boundary points have measure zero; allow a vanishing disagreement rate
    assert np.mean(fast != exact) < 1e-3


def test_from_spec_roundtrip():
    e = Idempotent.from_spec(
        {"bands": {"q": 0.5, "pattern": [[0.0, 0.16666666666666666]],
                   "refine": "double-per-band"}})
    assert e == Idempotent.cell_classes(6, [0])
    p = Idempotent.from_spec({"bands": {"period": 2, "full": [1]}})
    assert p == Idempotent.band_classes(2, [1])


def test_nontrivial_support_accumulates():
    e = Idempotent.band_classes(3, [1])
    # support and complement both recur in every period of bands
    hits = [e.contains(2.0 ** -(k + 0.5)) for k in range(1, 31)]
    assert any(hits) and not all(hits)
