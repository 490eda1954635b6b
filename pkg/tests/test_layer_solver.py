"""Tests for the exact transfer-matrix solver on layered profiles."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy import testing

from layermodes.errors import NotAnEigenvalue, OutOfDomain
from layermodes.layer_solver import (EVANESCENT, LINEAR, OSCILLATORY, Eigenpair, build_eigenfunction,
                                     dispersion, eigenvalue_by_index, eigenvalues_in_window, evaluate,
                                     interface_residuals, layer_regime, mass, propagate, zero_count)
from layermodes.profile import LayeredProfile


def test_layer_regimes():
    assert layer_regime(5.0, 1.0, 1.0).tag == OSCILLATORY
    assert layer_regime(5.0, 1.0, 1.0).wavenumber == pytest.approx(2.0)
    assert layer_regime(0.5, 1.0, 1.0).tag == EVANESCENT
    assert layer_regime(1.0, 1.0, 1.0).tag == LINEAR


def test_constant_profile_eigenvalues_and_functions():
    c0 = 2.0
    p = LayeredProfile.constant(c0, math.pi)
    y = np.linspace(0, math.pi, 101)
    for mu in (1.0, 3.0):
        pairs = eigenvalues_in_window(mu, 0.5 * c0 * mu ** 2, c0 * (mu ** 2 + 25.5), p)
        testing.assert_allclose([q.lam for q in pairs], [c0 * (mu ** 2 + l ** 2) for l in range(1, 6)], rtol=1e-12)
        assert [q.ell for q in pairs] == [1, 2, 3, 4, 5]
        for q in pairs:
            u, _ = evaluate(build_eigenfunction(q, p), y)
            ref = math.sqrt(2 * c0 / math.pi) * np.sin(q.ell * y)
            testing.assert_allclose(u * np.sign(u[1]) * np.sign(ref[1]), ref, atol=1e-10)


def test_count_equals_zero_count_difference():
    p = LayeredProfile([0, 0.1, 0.35, 0.6, 1.0], [2.0, 1.0, 3.5, 1.5])
    mu = 12.0
    lo, hi = 1.2 * mu ** 2, 4.0 * mu ** 2
    pairs = eigenvalues_in_window(mu, lo, hi, p)
    assert len(pairs) == zero_count(hi, mu, p) - zero_count(lo, mu, p)
    assert all(b.lam > a.lam for a, b in zip(pairs, pairs[1:]))
    assert all(q.residual < 1e-9 for q in pairs)


def test_scaling_invariance():
    """Scaling c by s scales every eigenvalue by s."""
    p = LayeredProfile([0, 0.3, 1.0], [1.0, 2.5])
    mu = 4.0
    base = [q.lam for q in eigenvalues_in_window(mu, 10.0, 400.0, p)]
    scaled = [q.lam for q in eigenvalues_in_window(mu, 30.0, 1200.0, p.scaled(3.0))]
    testing.assert_allclose(scaled, 3.0 * np.array(base), rtol=1e-11)


def test_eigenvalue_by_index_matches_window():
    p = LayeredProfile([0, 0.5, 1.0], [1.0, 4.0])
    mu = 10.0
    pairs = eigenvalues_in_window(mu, 1.0, 8.0 * mu ** 2, p)
    for q in pairs[:6]:
        assert eigenvalue_by_index(mu, q.ell, p).lam == pytest.approx(q.lam, rel=1e-11)


def test_deep_guided_mode_no_overflow():
    """Evanescent layers of thickness ~1 with mu ~ 500 grow by e^500."""
    p = LayeredProfile([0, 0.5, 1.0], [1.0, 4.0])
    mu = 500.0
    q = eigenvalue_by_index(mu, 1, p)
    assert mu ** 2 < q.lam < 4 * mu ** 2
    ef = build_eigenfunction(q, p)
    assert ef.transmission_residual < 1e-9
    assert mass(ef, 0.0, 1.0) == pytest.approx(1.0, rel=1e-10)
    assert mass(ef, 0.9, 1.0, weighted=False) < 1e-100


def test_propagate_and_dispersion_sign_change():
    p = LayeredProfile([0, 0.5, 1.0], [1.0, 4.0])
    mu = 3.0
    q = eigenvalue_by_index(mu, 2, p)
    f_lo, n_lo = dispersion(q.lam * (1 - 1e-6), mu, p)
    f_hi, n_hi = dispersion(q.lam * (1 + 1e-6), mu, p)
    assert f_lo * f_hi < 0
    assert (n_lo, n_hi) == (1, 2)
    state, count = propagate(q.lam, mu, p)
    u, du = state.values()
    assert abs(u) < 1e-8 * abs(du) / q.lam ** 0.5


def test_build_eigenfunction_rejects_non_eigenvalue():
    p = LayeredProfile([0, 0.5, 1.0], [1.0, 4.0])
    q = eigenvalue_by_index(3.0, 2, p)
    with pytest.raises(NotAnEigenvalue):
        build_eigenfunction(Eigenpair(q.lam * 1.01, 3.0, 2), p)


def test_evaluate_domain_and_normalization():
    p = LayeredProfile([0, 0.2, 0.7, 1.0], [1.0, 2.0, 1.5])
    ef = build_eigenfunction(eigenvalue_by_index(6.0, 4, p), p)
    with pytest.raises(OutOfDomain):
        evaluate(ef, 1.5)
    y = np.linspace(0, 1, 20001)
    u, _ = evaluate(ef, y)
    w = u ** 2 / p(y)
    # trapezoid across the jumps of 1/c is only first order
    assert np.trapezoid(w, y) == pytest.approx(1.0, rel=1e-4)
    assert mass(ef, 0, 1) == pytest.approx(1.0, rel=1e-12)
    assert abs(u[0]) < 1e-12 and abs(u[-1]) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.5, 4.0), min_size=2, max_size=8), st.floats(0.5, 30.0), st.integers(1, 12))
def test_transmission_continuity_random(values, mu, ell):
    """u and u' are continuous across every interface of a random profile."""
    p = LayeredProfile.uniform(values, H=1.0)
    ef = build_eigenfunction(eigenvalue_by_index(mu, ell, p), p)
    assert max(interface_residuals(ef), default=0.0) < 1e-9
    assert ef.ell == ell
