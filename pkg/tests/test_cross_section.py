"""Tests for the transverse Dirichlet eigenpairs."""
import math

import pytest
from numpy import testing

from layermodes.cross_section import (CrossSection, equidistribution_threshold, mode_at, mu_values,
                                      phi_mass_ratio)
from layermodes.errors import SchemaError, SubboxOutOfBounds


def test_interval_modes():
    cs = CrossSection.interval(math.pi)
    testing.assert_allclose([m.mu for m in mu_values(cs, 5)], [1, 2, 3, 4, 5])
    assert mode_at(cs, 7).mu2 == pytest.approx(49.0)


def test_square_modes_with_multiplicity():
    """Unit-scaled square: mu^2 = 2, 5, 5, 8, 10, 10, ... in index order."""
    cs = CrossSection.box([math.pi, math.pi])
    modes = mu_values(cs, 6)
    testing.assert_allclose([m.mu2 for m in modes], [2, 5, 5, 8, 10, 10])
    assert [m.multi_index for m in modes[:4]] == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert [m.k for m in modes] == [1, 2, 3, 4, 5, 6]


def test_rectangle_ordering():
    cs = CrossSection.box([1.0, 2.0])
    m = mu_values(cs, 3)
    expected = sorted([(n1 * math.pi) ** 2 + (n2 * math.pi / 2) ** 2 for n1 in range(1, 4) for n2 in range(1, 7)])
    testing.assert_allclose([x.mu2 for x in m], expected[:3])


def test_invalid_lengths():
    with pytest.raises(SchemaError) as info:
        CrossSection((1.0, -2.0))
    assert info.value.path == "lengths/1"
    with pytest.raises(SchemaError):
        CrossSection(())
    with pytest.raises(ValueError):
        mu_values(CrossSection.interval(1.0), 0)


def test_phi_mass_ratio():
    cs = CrossSection.interval(math.pi)
    m = mode_at(cs, 1)
    assert phi_mass_ratio(cs, m, [(0.0, math.pi)]) == pytest.approx(1.0)
    assert phi_mass_ratio(cs, m, [(0.0, math.pi / 2)]) == pytest.approx(0.5)
    # sine squared over (0, pi/4): pi/8 - 1/4, normalized by pi/2
    assert phi_mass_ratio(cs, m, [(0.0, math.pi / 4)]) == pytest.approx((math.pi / 8 - 0.25) / (math.pi / 2))
    with pytest.raises(SubboxOutOfBounds):
        phi_mass_ratio(cs, m, [(0.0, 4.0)])
    with pytest.raises(SubboxOutOfBounds):
        phi_mass_ratio(cs, m, [(0.0, 1.0), (0.0, 1.0)])


def test_equidistribution_threshold_guarantee():
    cs = CrossSection.box([1.0, 1.0])
    sub = [(0.2, 0.5), (0.1, 0.4)]
    n_thr = equidistribution_threshold(cs, sub, fraction=0.5)
    vol = 0.3 * 0.3
    for m in mu_values(cs, 400):
        if all(n >= t for n, t in zip(m.multi_index, n_thr)):
            assert phi_mass_ratio(cs, m, sub) >= 0.5 * vol
