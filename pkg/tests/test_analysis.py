"""Tests for the classification and estimate checks."""
import math

import numpy as np
import pytest
from numpy import testing

from layermodes import analysis as an
from layermodes.cross_section import CrossSection
from layermodes.errors import (BandIntersectsWell, EvanescentLayerPresent, InvalidOrdering, MissingDerivatives,
                               MissingWell, ModeBelowThreshold, NotAnEigenvalue, NotGuided, NotMonotone,
                               OutsideSpectralWindow, OutsideZone, WrongProfileShape)
from layermodes.layer_solver import build_eigenfunction, eigenvalue_by_index, eigenvalues_in_window
from layermodes.profile import LayeredProfile, SampledProfile, find_well


def _ef(profile, mu, ell):
    return build_eigenfunction(eigenvalue_by_index(mu, ell, profile), profile)


TWO = LayeredProfile([0, 0.5, 1.0], [1.0, 4.0])
CONST = LayeredProfile.constant(1.0, math.pi)


def test_thresholds():
    assert an.lambda_tilde0(3.0, 2.0) == pytest.approx(20.0)
    assert an.lambda0_band(1.0, 2.0, 0.1) == pytest.approx(2.0 * (1 + (60 * math.pi) ** 2))
    g = 6 * math.pi / 0.1
    mu0 = g * math.sqrt(2.0 / 0.1)
    assert an.lambda_alpha_eps(2.0, 0.1, 0.1) == pytest.approx(max(2.1 * mu0 ** 2, 2.0 * (mu0 ** 2 + g * g)))
    assert an.default_eps(TWO) == pytest.approx(0.15)
    assert an.default_eps(CONST) == pytest.approx(0.05)


def test_classify_tags():
    well = find_well(TWO, 4.0)
    mu = 10.0
    assert an.classify(1.5 * mu ** 2, mu, TWO, 0.15, well).tag == an.GUIDED
    assert an.classify(1.5 * mu ** 2, mu, TWO, 0.15).tag == an.RESIDUAL
    assert an.classify(3.9 * mu ** 2, mu, TWO, 0.15, well).tag == an.RESIDUAL
    assert an.classify(4.15 * mu ** 2, mu, TWO, 0.15, well).tag == an.NONGUIDED
    g = an.classify(2.0 * mu ** 2, mu, TWO, 0.15, well)
    assert g.xi == pytest.approx(math.sqrt(2 * (mu ** 2 - 2 * mu ** 2 / 4)))
    with pytest.raises(MissingWell):
        an.classify(2.0, 1.0, TWO, require_guided=True)
    with pytest.raises(ValueError):
        an.classify(2.0, 1.0, TWO, eps=0.0)


def test_zeros_of_constant_profile():
    ef = _ef(CONST, 1.0, 3)
    zs = an.zeros(ef)
    testing.assert_allclose(zs.zeros, [0, math.pi / 3, 2 * math.pi / 3, math.pi], atol=1e-12)
    testing.assert_allclose(zs.peaks, [math.pi / 6, math.pi / 2, 5 * math.pi / 6], atol=1e-12)
    testing.assert_array_equal(zs.hump_sign, zs.hump_sign[0] * np.array([1, -1, 1]))
    # concave where u > 0, convex where u < 0
    testing.assert_array_equal(zs.convexity, -zs.hump_sign)
    assert zs.tag == an.NONGUIDED
    assert zs.holds


def test_zero_gap_bound_on_two_layers():
    mu, eps = 8.0, 0.15
    for p in eigenvalues_in_window(mu, 4.15 * mu ** 2, 8 * mu ** 2, TWO):
        zs = an.zeros(build_eigenfunction(p, TWO), eps)
        assert zs.gap_bound == pytest.approx(an.zero_gap_bound(mu, 4.0, eps))
        assert zs.holds


def test_min_amplitude_constant_profile():
    """u = sqrt(2/pi) sin(l y) has min of u^2 + u'^2 equal to 2/pi at the peaks."""
    for ell in (2, 5):
        r = an.min_amplitude(_ef(CONST, 1.0, ell))
        assert r.r2 == pytest.approx(2 / math.pi, rel=1e-12)
        assert r.midpoint_match and r.expected_match and r.holds


def test_pc_amplitude_floor_formula():
    f = an.pc_amplitude_floor(TWO, 0.15, 1.0)
    kappa = 4.15 / 0.15
    assert f["kappa"] == pytest.approx(kappa)
    assert f["delta2"] == pytest.approx(math.exp(-2 * kappa * 3.0))
    assert f["floor"] == pytest.approx(f["delta2"] * 0.15 / 4.0)


def test_amplitude_ratios_identities():
    p = LayeredProfile([0, 0.2, 0.45, 0.8, 1.0], [1.0, 2.0, 1.3, 2.4])
    mu = 6.0
    for q in eigenvalues_in_window(mu, 2.6 * mu ** 2, 6 * mu ** 2, p):
        r = an.amplitude_ratios(build_eigenfunction(q, p), eps=0.1)
        assert r.max_residual < 1e-9
        assert r.cumulative_holds
        assert r.kappa <= r.kappa_uniform
        assert r.holds


def test_amplitude_ratio_preconditions():
    ef = _ef(TWO, 10.0, 1)
    with pytest.raises(EvanescentLayerPresent):
        an.amplitude_ratios(ef)


def test_decay_check_guided_mode():
    prof = LayeredProfile([0, 0.5, 1.0], [1.0, 4.0])
    well = find_well(prof, 4.0)
    ef = _ef(prof, 20.0, 1)
    v = an.decay_bound_check(ef, well, (0.7, 0.9))
    assert v.d == pytest.approx(0.2)
    assert v.holds and v.claims_hold
    assert v.lhs < v.rhs
    with pytest.raises(BandIntersectsWell):
        an.decay_bound_check(ef, well, (0.4, 0.9))
    with pytest.raises(ValueError):
        an.decay_bound_check(ef, well, (0.7, 0.9), t=1.0)
    ng = build_eigenfunction(eigenvalues_in_window(20.0, 4.2 * 400, 5 * 400, prof)[0], prof)
    with pytest.raises(NotGuided):
        an.decay_bound_check(ng, well, (0.7, 0.9))


def test_regression_slope():
    assert an.regression_slope([0, 1, 2], [1, 3, 5]) == pytest.approx(2.0)


def test_nonconcentration_floor_and_threshold():
    mu, eps = 1.0, 0.15
    lam0 = an.lambda0_band(mu, 4.0, 0.5)
    modes = [build_eigenfunction(q, TWO) for q in eigenvalues_in_window(mu, lam0, 1.5 * lam0, TWO)]
    rep = an.nonconcentration_floor(modes, (0.0, 0.5), eps)
    assert rep.holds
    assert rep.min_mass >= rep.floor
    low = [build_eigenfunction(q, TWO) for q in eigenvalues_in_window(mu, 4.2, 40.0, TWO)]
    with pytest.raises(ModeBelowThreshold):
        an.nonconcentration_floor(low, (0.0, 0.5), eps)
    rep = an.nonconcentration_floor(low + modes, (0.0, 0.5), eps, explore=True)
    assert rep.below_threshold.sum() == len(low)
    assert rep.holds


def test_monotone_checks():
    mu, eps = 3.0, 0.15
    for q in eigenvalues_in_window(mu, 4.15 * mu ** 2, 12 * mu ** 2, TWO):
        r = an.monotone_checks(build_eigenfunction(q, TWO), eps)
        assert r.energy_nondecreasing and r.peaks_nondecreasing
        assert r.peak_ratio <= r.frak_c_sharp * (1 + 1e-9) <= r.frak_c * (1 + 1e-9)
        assert r.holds
    down = LayeredProfile([0, 0.5, 1.0], [4.0, 1.0])
    with pytest.raises(NotMonotone):
        an.monotone_checks(_ef(down, 1.0, 5), eps)
    with pytest.raises(OutsideSpectralWindow):
        an.monotone_checks(_ef(TWO, 10.0, 1), eps)


def test_lipschitz_energy_check():
    p = SampledProfile.from_function(lambda y: 1 + y, 1.0, 2048, df=lambda y: 1 + 0 * y)
    from layermodes.general_solver import eigenvalues_pruefer
    mu = 5.0
    for q in eigenvalues_pruefer(mu, 2.05 * mu ** 2, 4 * mu ** 2, p):
        r = an.lipschitz_energy_check(q, p)
        assert r.holds
        assert r.fd_pointwise_ratio <= r.C * 1.01
    with pytest.raises(MissingDerivatives):
        an.lipschitz_energy_check(q, SampledProfile.from_function(lambda y: 1 + y, 1.0, 16))


def test_existence_condition_reference_triple():
    c = an.existence_condition(1.0, 1.2, 4.0, 0.1, 0.6, 1.0, 0.05)
    assert c.lhs == pytest.approx(math.sqrt(1.2 * 0.2 / 2.8), rel=1e-12)
    assert c.lhs == pytest.approx(0.2928, abs=1e-4)
    assert c.rhs == pytest.approx(0.5 / 0.9)
    assert c.holds and c.eps_condition
    assert c.mu_sufficient == pytest.approx(3 * math.pi / c.slope)
    assert c.mu_threshold <= c.mu_sufficient
    for mu in np.linspace(c.mu_threshold + 1e-9, 3 * c.mu_sufficient, 200):
        assert c.admits(mu)
    with pytest.raises(InvalidOrdering):
        an.existence_condition(1.0, 0.9, 4.0, 0.1, 0.6, 1.0, 0.05)
    with pytest.raises(InvalidOrdering):
        an.existence_condition(1.0, 1.2, 4.0, 0.1, 0.6, 1.0, 2.0)


def test_existence_verify():
    p = LayeredProfile([0, 0.1, 0.6, 1.0], [1.0, 1.2, 4.0])
    rep = an.existence_verify(p, 0.05, range(8, 14), CrossSection.interval(1.0))
    assert rep.holds
    assert all(v.count >= v.lower_bound for v in rep.verdicts)
    const = an.existence_verify(CONST, 0.05, [1, 2], CrossSection.interval(math.pi))
    assert all(v.count == 0 for v in const.verdicts) and const.condition is None
    with pytest.raises(WrongProfileShape):
        an.existence_verify(LayeredProfile.uniform([1.0, 4.0, 2.0]), 0.05, [1], CrossSection.interval(1.0))


def test_three_layer_ratios():
    p = LayeredProfile([0, 0.1, 0.6, 1.0], [1.0, 1.2, 4.0])
    eps = 0.05
    mu = 60.0
    pairs = eigenvalues_in_window(mu, (1.2 + eps) * mu ** 2, (4 - eps) * mu ** 2, p)
    assert pairs
    for q in pairs[:5]:
        r = an.three_layer_ratios(build_eigenfunction(q, p), eps)
        assert max(r.identity_residuals) < 1e-9
        assert r.M1 <= r.scaled_ratio <= r.M2
        assert r.tail_slope_error < 0.05
        assert r.holds
    with pytest.raises(OutsideZone):
        an.three_layer_ratios(_ef(p, mu, 1), eps)


def test_bv_convergence_small():
    from layermodes.general_solver import eigenvalues_pruefer
    p = SampledProfile.from_function(lambda y: 1 + y, 1.0, 1024, df=lambda y: 1 + 0 * y)
    mu = 3.0
    q = eigenvalues_pruefer(mu, 2.1 * mu ** 2, 40 * mu ** 2, p)[0]
    rep = an.bv_convergence(p, q.lam, mu, [8, 16, 32, 64], tol=1e-2)
    assert rep.lam_decreasing and rep.u_decreasing and rep.tv_ok
    assert rep.index_match.all()
    with pytest.raises(NotAnEigenvalue):
        an.bv_convergence(p, q.lam * 1.01, mu, [8, 16])


def test_mass_ratio_3d():
    ef = _ef(CONST, 1.0, 1)
    assert an.mass_ratio_3d(ef, 0.5, (0, math.pi)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        an.mass_ratio_3d(ef, 1.5, (0, 1))
