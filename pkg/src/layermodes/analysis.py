"""Classification, bounds and convergence checks on computed eigenpairs.

Every check returns a small report object with the measured quantity, the
theoretical bound it is compared against and a ``holds`` flag.  Checks do
not raise on a violated bound; the command line turns ``holds == False``
into a failing exit status.  Violated *preconditions* raise.

Two different exponents called xi appear below.  The guided decay check
uses xi = sqrt(2 (mu^2 - lam/c1)), the rate of w = u^2 in the equation
w'' - xi^2 w = ..., whereas the three-layer analysis uses the layer
wavenumbers xi_j = sqrt(|lam/c_j - mu^2|) of u itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from . import general_solver as gs
from .cross_section import CrossSection, mu_values
from .errors import (BandIntersectsWell, EvanescentLayerPresent, InvalidOrdering, MissingDerivatives,
                     MissingWell, ModeBelowThreshold, NoNearbyEigenvalue, NotAnEigenvalue, NotGuided,
                     NotMonotone, NotPiecewiseConstant, OutsideSpectralWindow, OutsideZone,
                     WrongProfileShape)
from .layer_solver import (Eigenfunction1D, build_eigenfunction, eigenvalue_by_index, eigenvalues_in_window,
                           evaluate, mass)
from .profile import (LayeredProfile, SampledProfile, WellDescriptor, extremes, pc_approximate, sup_distance,
                      total_variation)

GUIDED, NONGUIDED, RESIDUAL = "Guided", "NonGuided", "Residual"


def default_eps(profile) -> float:
    """0.05 (c_M - c_m), or 0.05 c_M for a constant profile."""
    c_m, c_M = extremes(profile)
    spread = c_M - c_m
    return 0.05 * (spread if spread > 0 else c_M)


def _lam_mu(pair, mu=None):
    lam = float(getattr(pair, "lam", pair))
    if mu is None:
        mu = getattr(pair, "mu")
    return lam, float(mu)


# ---------------------------------------------------------------------------
# thresholds


def lambda_tilde0(mu: float, c_M: float) -> float:
    """Smallest lam with mu^2 p(y) > 1 everywhere: c_M (mu^2 + 1)."""
    return c_M * (mu * mu + 1.0)


def lambda0_band(mu: float, c_M: float, width: float) -> float:
    """Per-mu threshold above which consecutive zeros are closer than width/6.

    By Sturm comparison the zero gap is at most pi / gamma when
    mu^2 p >= gamma^2, and gamma = 6 pi / width is needed for the band
    floor argument.
    """
    g = 6.0 * math.pi / width
    return c_M * (mu * mu + g * g)


def lambda_alpha_eps(c_M: float, eps: float, width: float) -> float:
    """Threshold uniform in mu from the comparison recipe.

    mu_0 = gamma sqrt(c_M/eps), lam_0 = c_M (mu_0^2 + gamma^2) and the
    result is max((c_M + eps) mu_0^2, lam_0).
    """
    g = 6.0 * math.pi / width
    mu0 = g * math.sqrt(c_M / eps)
    lam0 = c_M * (mu0 * mu0 + g * g)
    return max((c_M + eps) * mu0 * mu0, lam0)


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ModeClass:
    tag: str
    lam: float
    mu: float
    eps: float
    c_m: float
    c_M: float
    c1: Optional[float] = None
    xi: Optional[float] = None

    @property
    def ratio(self) -> float:
        return self.lam / (self.mu * self.mu)


def classify(pair, mu: Optional[float], profile, eps: Optional[float] = None,
             well: Optional[WellDescriptor] = None, require_guided: bool = False) -> ModeClass:
    """Tag an eigenpair as Guided, NonGuided or Residual.

    Guided needs a well with threshold c1 and c_m mu^2 <= lam <= (c1 - eps) mu^2;
    NonGuided is lam >= (c_M + eps) mu^2; everything else is Residual.
    """
    lam, mu = _lam_mu(pair, mu)
    if eps is None:
        eps = default_eps(profile)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if require_guided and well is None:
        raise MissingWell("guided classification needs a well descriptor")
    c_m, c_M = extremes(profile)
    mu2 = mu * mu
    if well is not None and c_m * mu2 <= lam <= (well.c1 - eps) * mu2:
        xi = math.sqrt(2.0 * (mu2 - lam / well.c1))
        return ModeClass(GUIDED, lam, mu, eps, c_m, c_M, well.c1, xi)
    tag = NONGUIDED if lam >= (c_M + eps) * mu2 else RESIDUAL
    return ModeClass(tag, lam, mu, eps, c_m, c_M, None if well is None else well.c1)


# ---------------------------------------------------------------------------
# zeros and half-wave peaks


def _roots_sampled(f, y0, y1, n=64):
    ys = np.linspace(y0, y1, n + 1)
    fs = np.array([float(f(y)) for y in ys])
    out = []
    for i in range(n):
        if fs[i] == 0.0:
            out.append(ys[i])
        elif fs[i] * fs[i + 1] < 0:
            out.append(brentq(f, ys[i], ys[i + 1], xtol=1e-15 * max(1.0, abs(y1))))
    if fs[-1] == 0.0:
        out.append(ys[-1])
    return out


def _layer_zeros(ef: Eigenfunction1D, j: int) -> List[float]:
    kd, s, p, r = int(ef.kind[j]), ef.s[j], ef.p[j], ef.r[j]
    y0, y1 = ef.y0[j], ef.y1[j]
    if kd == 0:
        lo, hi = r, s * (y1 - y0) + r
        js = np.arange(math.ceil(lo / math.pi), math.floor(hi / math.pi) + 1)
        return list(y0 + (js * math.pi - r) / s)
    if kd == 1:
        if p * r < 0:
            y = 0.5 * (y0 + y1) + math.log(-r / p) / (2.0 * s)
            if y0 <= y <= y1:
                return [y]
        return []
    return _roots_sampled(lambda y: ef.layer_state(j, y)[0], y0, y1)


def _layer_critical(ef: Eigenfunction1D, j: int) -> List[float]:
    """Points where u' = 0 inside layer j (plus samples for linear layers)."""
    kd, s, p, r = int(ef.kind[j]), ef.s[j], ef.p[j], ef.r[j]
    y0, y1 = ef.y0[j], ef.y1[j]
    if kd == 0:
        lo, hi = r - 0.5 * math.pi, s * (y1 - y0) + r - 0.5 * math.pi
        js = np.arange(math.ceil(lo / math.pi), math.floor(hi / math.pi) + 1)
        return list(y0 + (0.5 * math.pi + js * math.pi - r) / s)
    if kd == 1:
        if p * r > 0:
            y = 0.5 * (y0 + y1) + math.log(r / p) / (2.0 * s)
            if y0 <= y <= y1:
                return [y]
        return []
    return list(np.linspace(y0, y1, 65))


@dataclass(frozen=True, eq=False)
class ZeroSet:
    """Ordered zeros 0 = z_0 < ... < z_s = H and one peak per gap.

    ``hump_sign`` is the sign of u on each gap; ``convexity`` is the sign
    of u'' at the gap's peak (-1 concave, +1 convex).
    """

    zeros: np.ndarray
    peaks: np.ndarray
    peak_values: np.ndarray
    hump_sign: np.ndarray
    convexity: np.ndarray
    tag: str
    gap_bound: Optional[float] = None

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.zeros)

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max())

    @property
    def holds(self) -> bool:
        """Zero-gap bound (only asserted for NonGuided modes)."""
        if self.gap_bound is None:
            return True
        return self.max_gap <= self.gap_bound * (1.0 + 1e-12)


def zero_gap_bound(mu: float, c_M: float, eps: float) -> float:
    """2 pi / mu * sqrt(c_M / eps)."""
    return 2.0 * math.pi / mu * math.sqrt(c_M / eps)


def zeros(ef: Eigenfunction1D, eps: Optional[float] = None) -> ZeroSet:
    """Zeros of u in closed form per layer, with half-wave peaks."""
    H = ef.H
    tol = 1e-10 * H
    cand = []
    for j in range(ef.n_layers):
        cand.extend(_layer_zeros(ef, j))
    cand = np.sort(np.asarray(cand, dtype=float))
    interior = []
    for z in cand:
        if z <= tol or z >= H - tol:
            continue
        if interior and z - interior[-1] <= tol:
            continue
        interior.append(z)
    zs = np.array([0.0] + interior + [H])

    crit = []
    for j in range(ef.n_layers):
        crit.extend(_layer_critical(ef, j))
    crit.extend(ef.profile.breakpoints[1:-1])
    crit = np.asarray(crit, dtype=float)
    crit = crit[(crit > 0.0) & (crit < H)]
    n_gaps = len(zs) - 1
    if len(crit):
        uc = evaluate(ef, crit)[0]
        gi = np.clip(np.searchsorted(zs, crit, side="right") - 1, 0, n_gaps - 1)
    # fallback for a gap without candidates: its midpoint
    peaks = 0.5 * (zs[:-1] + zs[1:])
    vals = evaluate(ef, peaks)[0] ** 2
    if len(crit):
        u2 = uc * uc
        order = np.lexsort((-u2, gi))
        first = order[np.r_[True, gi[order][1:] != gi[order][:-1]]]
        peaks[gi[first]] = crit[first]
        vals[gi[first]] = u2[first]
    upk = evaluate(ef, peaks)[0]
    hump = np.sign(upk).astype(int)
    qpk = ef.q[ef.profile.layer_index(peaks)]
    conv = np.sign(-qpk * upk).astype(int)

    if eps is None:
        eps = default_eps(ef.profile)
    mc = classify(ef, ef.mu, ef.profile, eps)
    bound = zero_gap_bound(ef.mu, mc.c_M, eps) if mc.tag == NONGUIDED else None
    return ZeroSet(zs, peaks, vals, hump, conv, mc.tag, bound)


# ---------------------------------------------------------------------------
# minimal amplitude


@dataclass(frozen=True, eq=False)
class MinAmplitudeReport:
    r2: float
    argmin: float
    peak_values: np.ndarray
    peaks: np.ndarray
    midpoint_match: bool
    expected_match: bool
    lam_tilde0: float

    @property
    def holds(self) -> bool:
        return self.r2 > 0.0 and (self.midpoint_match or not self.expected_match)


def _energy(ef, y):
    u, du = evaluate(ef, y)
    return u * u + du * du


def _layer_energy_min(ef: Eigenfunction1D, j: int) -> Tuple[float, float]:
    kd, s, p, r = int(ef.kind[j]), ef.s[j], ef.p[j], ef.r[j]
    y0, y1 = ef.y0[j], ef.y1[j]
    if kd == 0:
        # u^2 + u'^2 = p^2 (sin^2 phi + s^2 cos^2 phi): extrema at phi = j pi/2
        lo, hi = r, s * (y1 - y0) + r
        js = np.arange(math.ceil(lo / (0.5 * math.pi)), math.floor(hi / (0.5 * math.pi)) + 1)
        ph = np.concatenate(([lo, hi], js * 0.5 * math.pi))
        e = p * p * (np.sin(ph) ** 2 + s * s * np.cos(ph) ** 2)
        i = int(np.argmin(e))
        return float(e[i]), float(y0 + (ph[i] - r) / s)
    if kd == 1:
        ys = [y0, y1]
        if p != 0.0 and r != 0.0:
            y = 0.5 * (y0 + y1) + math.log(abs(r) / abs(p)) / (2.0 * s)
            if y0 < y < y1:
                ys.append(y)
    else:
        ys = list(np.linspace(y0, y1, 129))
    ys = np.asarray(ys)
    u, du = ef.layer_state(j, ys)
    e = u * u + du * du
    i = int(np.argmin(e))
    return float(e[i]), float(ys[i])


def min_amplitude(ef: Eigenfunction1D, lam_tilde0_value: Optional[float] = None,
                  zero_set: Optional[ZeroSet] = None) -> MinAmplitudeReport:
    """inf over [0, H] of u^2 + u'^2, located layer by layer in closed form."""
    best = (math.inf, 0.0)
    for j in range(ef.n_layers):
        best = min(best, _layer_energy_min(ef, j))
    zs = zero_set if zero_set is not None else zeros(ef)
    c_M = float(np.max(ef.profile.values))
    if lam_tilde0_value is None:
        lam_tilde0_value = lambda_tilde0(ef.mu, c_M)
    pk_min = float(zs.peak_values.min())
    match = abs(best[0] - pk_min) <= 1e-9 * max(pk_min, 1e-300)
    expected = ef.lam > lam_tilde0_value and float(np.min(ef.q)) > 1.0
    return MinAmplitudeReport(best[0], best[1], zs.peak_values, zs.peaks, bool(match), bool(expected),
                              float(lam_tilde0_value))


def pc_amplitude_floor(profile: LayeredProfile, eps: float, mu1: float, kappa: Optional[float] = None) -> dict:
    """Lower bound delta^2 min(1, mu_1^2 eps / c_M) for piecewise-constant profiles.

    delta^2 = c_m exp(-2 kappa V) / H follows from the normalization and the
    cumulative amplitude bound; kappa defaults to the uniform value
    (c_M + eps) / (eps c_m).
    """
    c_m, c_M = extremes(profile)
    V = total_variation(profile)
    if kappa is None:
        kappa = (c_M + eps) / (eps * c_m)
    delta2 = c_m * math.exp(-2.0 * kappa * V) / profile.H
    return dict(delta2=delta2, kappa=kappa, V=V, floor=delta2 * min(1.0, mu1 * mu1 * eps / c_M))


# ---------------------------------------------------------------------------
# amplitude ratios across interfaces (all layers oscillatory)


@dataclass(frozen=True, eq=False)
class AmplitudeRatioReport:
    measured: np.ndarray        # beta_j^2 / beta_{j+1}^2
    predicted: np.ndarray       # sin^2 B + (q_{j+1}/q_j) cos^2 B
    companion: np.ndarray       # beta_{j+1}^2 / beta_j^2 = 1 + (q_j/q_{j+1} - 1) cos^2 A
    residuals: np.ndarray       # max relative residual of both identities per interface
    identity_residuals: np.ndarray  # q-ratio identity in terms of lam, mu, c
    kappa: float                # per-instance sharp constant
    kappa_uniform: Optional[float]
    V: float
    cumulative: np.ndarray      # beta_q^2 / beta_0^2
    tol: float = 1e-9

    @property
    def max_residual(self) -> float:
        r = np.concatenate((self.residuals, self.identity_residuals, [0.0]))
        return float(r.max())

    @property
    def cumulative_holds(self) -> bool:
        lo, hi = math.exp(-self.kappa * self.V), math.exp(self.kappa * self.V)
        return bool(np.all(self.cumulative >= lo * (1 - 1e-12)) and np.all(self.cumulative <= hi * (1 + 1e-12)))

    @property
    def holds(self) -> bool:
        return self.max_residual < self.tol and self.cumulative_holds


def amplitude_ratios(ef: Eigenfunction1D, eps: Optional[float] = None) -> AmplitudeRatioReport:
    """Interface amplitude ratios and their closed-form predictions."""
    if not isinstance(ef, Eigenfunction1D) or not isinstance(ef.profile, LayeredProfile):
        raise NotPiecewiseConstant("amplitude ratios need a piecewise-constant eigenfunction")
    if np.any(ef.kind != 0):
        raise EvanescentLayerPresent("every layer must be oscillatory (lam > c_M mu^2)")
    c = ef.profile.values
    lam, mu2 = ef.lam, ef.mu * ef.mu
    n = ef.n_layers
    beta2 = ef.p ** 2
    meas, pred, comp, res, ires, kap = [], [], [], [], [], []
    for j in range(n - 1):
        B = ef.r[j + 1]
        A = ef.s[j] * (ef.y1[j] - ef.y0[j]) + ef.r[j]
        pr = ef.q[j + 1] / ef.q[j]
        m = beta2[j] / beta2[j + 1]
        pv = math.sin(B) ** 2 + pr * math.cos(B) ** 2
        cv = 1.0 + (1.0 / pr - 1.0) * math.cos(A) ** 2
        meas.append(m)
        pred.append(pv)
        comp.append(cv)
        res.append(max(abs(m / pv - 1.0), abs((1.0 / m) / cv - 1.0)))
        ident = lam / (lam - mu2 * c[j]) * (c[j] - c[j + 1]) / c[j + 1]
        ires.append(abs((pr - 1.0) - ident) / (1.0 + abs(ident)))
        dc = abs(c[j + 1] - c[j])
        kap.append(max(abs(pr - 1.0), abs(1.0 / pr - 1.0)) / dc)
    c_m, c_M = extremes(ef.profile)
    ku = None if eps is None else (c_M + eps) / (eps * c_m)
    return AmplitudeRatioReport(np.array(meas), np.array(pred), np.array(comp), np.array(res), np.array(ires),
                                float(max(kap, default=0.0)), ku, total_variation(ef.profile),
                                beta2 / beta2[0])


# ---------------------------------------------------------------------------
# guided decay


@dataclass(frozen=True)
class DecayVerdict:
    lam: float
    mu: float
    lhs: float
    rhs: float
    xi: float
    d: float
    t: float
    contrast: float
    well_mass: float
    observed_exponent: float
    upper_claim_ratio: float
    lower_claim_ratio: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs

    @property
    def claims_hold(self) -> bool:
        return self.upper_claim_ratio <= 1.0 + 1e-12 and self.lower_claim_ratio >= 1.0 - 1e-12


def well_contrast(profile, well: WellDescriptor) -> float:
    """sup over the well of |1/c - 1/c1| (exact for layers, grid sup for samples)."""
    a, b, c1 = well.alpha, well.beta, well.c1
    if isinstance(profile, LayeredProfile):
        br, v = profile.breakpoints, profile.values
        sel = (br[1:] > a) & (br[:-1] < b)
        vals = v[sel]
    else:
        g = profile.grid
        inner = g[(g > a) & (g < b)]
        vals = profile(np.concatenate(([a, b], inner)))
    return float(np.max(np.abs(1.0 / vals - 1.0 / c1)))


def decay_bound_check(ef: Eigenfunction1D, well: WellDescriptor, band: Tuple[float, float],
                      t: float = 0.5, n_points: int = 33) -> DecayVerdict:
    """Exponential decay of the mass outside a well for a guided mode."""
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    a, b = float(band[0]), float(band[1])
    if not a < b:
        raise ValueError("band must satisfy a < b")
    al, be = well.alpha, well.beta
    if a > be:
        d, gamma = a - be, t * a + (1.0 - t) * be
    elif b < al:
        d, gamma = al - b, t * b + (1.0 - t) * al
    else:
        raise BandIntersectsWell(f"band ({a}, {b}) meets the closure of the well ({al}, {be})")
    xi2 = 2.0 * (ef.mu ** 2 - ef.lam / well.c1)
    if not xi2 > 0:
        raise NotGuided(f"xi^2 = 2(mu^2 - lam/c1) = {xi2} is not positive")
    xi = math.sqrt(xi2)
    S = well_contrast(ef.profile, well)
    wm = mass(ef, al, be, weighted=False)
    lhs = mass(ef, a, b, weighted=False)
    s = (1.0 - t) * d
    rhs = S * ef.lam / xi ** 3 * math.exp(-xi * s) / s * wm
    obs = -math.log(lhs) / d if lhs > 0 else math.inf

    ys = np.linspace(a, b, n_points)
    w = evaluate(ef, ys)[0] ** 2
    dist = np.where(ys > be, ys - be, al - ys)
    up = S * ef.lam / xi * np.exp(-xi * dist) * wm
    with np.errstate(divide="ignore", invalid="ignore"):
        up_ratio = float(np.max(np.where(up > 0, w / up, 0.0)))
    lower_rhs = 0.5 * xi2 * s * lhs
    wg = evaluate(ef, gamma)[0] ** 2
    low_ratio = wg / lower_rhs if lower_rhs > 0 else math.inf
    return DecayVerdict(ef.lam, ef.mu, lhs, rhs, xi, d, t, S, wm, obs, up_ratio, low_ratio)


def regression_slope(x, y) -> float:
    """Least-squares slope of y against x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# non-concentration floor


@dataclass(frozen=True, eq=False)
class FloorReport:
    band: Tuple[float, float]
    eps: float
    lams: np.ndarray
    mus: np.ndarray
    masses: np.ndarray
    r2: np.ndarray
    floors: np.ndarray
    thresholds: np.ndarray
    lam_alpha_eps: float
    explore: bool
    below_threshold: np.ndarray

    @property
    def min_mass(self) -> float:
        return float(self.masses.min())

    @property
    def floor(self) -> float:
        """Family floor (2/9) r^2 (b-a) / c_M with the family minimum of r^2."""
        return float(self.floors.min())

    @property
    def holds(self) -> bool:
        ok = self.masses >= self.floors * (1.0 - 1e-12)
        if self.explore:
            ok = ok | self.below_threshold
        return bool(np.all(ok))


def nonconcentration_floor(modes: Sequence[Eigenfunction1D], band: Tuple[float, float],
                           eps: Optional[float] = None, explore: bool = False,
                           r2_values: Optional[Sequence[float]] = None) -> FloorReport:
    """Band mass of NonGuided modes against (2/9) r^2 (b - a) / c_M.

    Every mode must be NonGuided and lie above the per-mu threshold
    ``lambda0_band``; otherwise :class:`ModeBelowThreshold` is raised.  In
    explore mode such modes are kept, measured, and excluded from ``holds``.
    ``r2_values`` may carry precomputed minimal amplitudes, one per mode.
    """
    if not modes:
        raise ValueError("no modes given")
    a, b = float(band[0]), float(band[1])
    profile = modes[0].profile
    if not 0.0 <= a < b <= profile.H:
        raise ValueError(f"band ({a}, {b}) must lie inside [0, {profile.H}]")
    if eps is None:
        eps = default_eps(profile)
    c_m, c_M = extremes(profile)
    width = b - a
    lams, mus, masses, r2s, floors, thr, below = [], [], [], [], [], [], []
    if r2_values is not None and len(r2_values) != len(modes):
        raise ValueError("r2_values must have one entry per mode")
    for i, ef in enumerate(modes):
        lam0 = lambda0_band(ef.mu, c_M, width)
        bad = ef.lam < (c_M + eps) * ef.mu ** 2 or ef.lam <= lam0
        r2 = min_amplitude(ef).r2 if r2_values is None else float(r2_values[i])
        lams.append(ef.lam)
        mus.append(ef.mu)
        masses.append(mass(ef, a, b, weighted=True))
        r2s.append(r2)
        floors.append(2.0 / 9.0 * r2 * width / c_M)
        thr.append(lam0)
        below.append(bad)
    below = np.array(below)
    if np.any(below) and not explore:
        offending = [l for l, bd in zip(lams, below) if bd]
        raise ModeBelowThreshold(
            f"{len(offending)} mode(s) are not NonGuided above the band threshold", offending)
    return FloorReport((a, b), eps, np.array(lams), np.array(mus), np.array(masses), np.array(r2s),
                       np.array(floors), np.array(thr), lambda_alpha_eps(c_M, eps, width), explore, below)


# ---------------------------------------------------------------------------
# monotone profiles


@dataclass(frozen=True, eq=False)
class MonotoneReport:
    energy_nondecreasing: bool
    peaks_nondecreasing: bool
    peak_ratio: float
    frak_c: float
    frak_c_sharp: float
    r2: float
    H: float
    c_m: float
    above_threshold: bool

    @property
    def floor_lhs(self) -> float:
        return self.H * self.frak_c ** 2 * self.r2

    @property
    def holds(self) -> bool:
        return (self.energy_nondecreasing and self.peaks_nondecreasing and self.peak_ratio <= self.frak_c_sharp
                * (1 + 1e-9) and self.peak_ratio <= self.frak_c * (1 + 1e-9) and self.floor_lhs >= self.c_m)


def monotone_checks(ef: Eigenfunction1D, eps: Optional[float] = None, n_per_layer: int = 17,
                    rtol: float = 1e-9) -> MonotoneReport:
    """Energy and peak monotonicity for a nondecreasing profile.

    ``frak_c`` is the uniform constant c_M (c_M + eps - c_m) / (c_m eps),
    the largest ratio of alpha^2 = lam/c - mu^2 over the profile for any
    lam >= (c_M + eps) mu^2; ``frak_c_sharp`` is that ratio for this mode.
    """
    v = ef.profile.values
    if np.any(np.diff(v) < 0):
        raise NotMonotone("profile values must be nondecreasing")
    if eps is None:
        eps = default_eps(ef.profile)
    c_m, c_M = extremes(ef.profile)
    if ef.lam < (c_M + eps) * ef.mu ** 2:
        raise OutsideSpectralWindow("monotone checks need a NonGuided mode")
    E = []
    for j in range(ef.n_layers):
        ys = np.linspace(ef.y0[j], ef.y1[j], n_per_layer)
        u, du = ef.layer_state(j, ys)
        E.append(u * u + du * du / ef.q[j])
    E = np.concatenate(E)
    e_ok = bool(np.all(np.diff(E) >= -rtol * E[:-1]))
    zs = zeros(ef, eps)
    pk = zs.peak_values
    p_ok = bool(np.all(np.diff(pk) >= -rtol * pk[:-1]))
    ratio = float(pk.max() / pk.min())
    frak = c_M * (c_M + eps - c_m) / (c_m * eps)
    sharp = float(ef.q.max() / ef.q.min())
    r2 = min_amplitude(ef, zero_set=zs).r2
    return MonotoneReport(e_ok, p_ok, ratio, frak, sharp, r2, ef.H, c_m,
                          ef.lam > lambda_tilde0(ef.mu, c_M))


# ---------------------------------------------------------------------------
# Lipschitz profiles


@dataclass(frozen=True, eq=False)
class LipschitzReport:
    C: float
    pointwise_ratio: float      # max |dE/dy| / E from the exact identity
    fd_pointwise_ratio: float   # same from finite differences of E
    global_ratio: float         # max E / min E
    global_bound: float         # exp(C H)

    @property
    def holds(self) -> bool:
        return self.pointwise_ratio <= self.C * (1 + 1e-9) + 1e-12 and self.global_ratio <= self.global_bound * (
            1 + 1e-9)


def lipschitz_energy_check(pair, profile: SampledProfile, eps: Optional[float] = None,
                           n_eval: Optional[int] = None) -> LipschitzReport:
    """Energy E = u^2 + (u'/alpha)^2 with alpha^2 = lam/c - mu^2 varies at rate <= C."""
    if not isinstance(profile, SampledProfile) or profile.dsamples is None:
        raise MissingDerivatives("the Lipschitz check needs derivative samples")
    lam, mu = _lam_mu(pair)
    if eps is None:
        eps = default_eps(profile)
    c_m, c_M = extremes(profile)
    if lam < (c_M + eps) * mu * mu:
        raise OutsideSpectralWindow("the Lipschitz check needs a NonGuided mode")
    y = profile.grid if n_eval is None else np.linspace(0.0, profile.H, n_eval)
    u, du = gs.normalized_solution(profile, lam, mu, y)
    c = profile(y)
    dc = np.interp(y, profile.grid, profile.dsamples)
    a2 = lam / c - mu * mu
    E = u * u + du * du / a2
    dE = du * du * lam * dc / (c * c * a2 * a2)
    C = (c_M + eps) / eps * float(np.max(np.abs(profile.dsamples) / profile.samples))
    fd = np.gradient(E, y)
    return LipschitzReport(C, float(np.max(np.abs(dE) / E)), float(np.max(np.abs(fd) / E)),
                           float(E.max() / E.min()), math.exp(C * profile.H))


# ---------------------------------------------------------------------------
# three-layer existence and ratios


@dataclass(frozen=True)
class ExistenceCondition:
    c: Tuple[float, float, float]
    h0: float
    h1: float
    H: float
    eps: float
    lhs: float
    rhs: float
    eps_condition: bool
    slope: float
    mu_sufficient: float
    mu_threshold: float
    a_n: float
    a_N: float
    a_A: float

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs

    def n(self, mu: float) -> int:
        return int(math.floor(self.a_n * mu))

    def N(self, mu: float) -> int:
        return int(math.floor(self.a_N * mu))

    def p_lower(self, mu: float) -> float:
        return self.a_A * mu

    def p_upper(self, mu: float) -> float:
        return (self.a_n + self.a_N) * mu - 2.0

    def admits(self, mu: float) -> bool:
        """An integer p with p_lower < p <= p_upper exists."""
        return math.floor(self.p_upper(mu)) > self.p_lower(mu)

    def count_lower_bound(self, mu: float) -> int:
        """Eigenvalues with index in (p_lower, n + N] lie in the window."""
        return max(0, self.n(mu) + self.N(mu) - int(math.floor(self.p_lower(mu))))


def existence_condition(c0: float, c1: float, c2: float, h0: float, h1: float, H: float,
                        eps: float) -> ExistenceCondition:
    """Closed-form sufficient condition for eigenvalues in ((c1+eps) mu^2, (c2-eps) mu^2)."""
    if not (0 < c0 < c1 < c2):
        raise InvalidOrdering("need 0 < c0 < c1 < c2")
    if not (0 < h0 < h1 < H):
        raise InvalidOrdering("need 0 < h0 < h1 < H")
    if not (0 < eps < 0.5 * (c2 - c1)):
        raise InvalidOrdering("need 0 < eps < (c2 - c1)/2")
    lhs = math.sqrt(c1 * (c1 - c0) / (c0 * (c2 - c1)))
    rhs = (h1 - h0) / (H - h0)
    e_lhs = math.sqrt(c1 * (c1 + eps - c0) / (c0 * (c2 - eps - c1))) * (
        1.0 - h0 / H * math.sqrt((c1 - c0) / (c1 + eps - c0)))
    eps_ok = e_lhs < (h1 - h0) / H
    a_n = h0 / math.pi * math.sqrt((c1 - c0) / c0)
    a_N = (h1 - h0) / math.pi * math.sqrt((c2 - eps - c1) / c1)
    a_A = H / math.pi * math.sqrt((c1 + eps - c0) / c0)
    slope = math.pi * (a_n + a_N - a_A)
    if slope <= 0:
        return ExistenceCondition((c0, c1, c2), h0, h1, H, eps, lhs, rhs, eps_ok, slope, math.inf, math.inf,
                                  a_n, a_N, a_A)
    mu_suff = 3.0 * math.pi / slope
    # floor(p_upper) = j on [mu_j, mu_{j+1}) with mu_j = (j + 2)/b; the
    # condition fails on that piece iff j <= a_A mu near its right end.
    b = a_n + a_N
    thr = 0.0
    j = -2
    while (j + 2) / b < mu_suff:
        right = (j + 3) / b
        if j <= a_A * right:
            thr = right
        j += 1
    return ExistenceCondition((c0, c1, c2), h0, h1, H, eps, lhs, rhs, eps_ok, slope, mu_suff, thr, a_n, a_N, a_A)


@dataclass(frozen=True)
class ExistenceVerdict:
    k: int
    mu: float
    window: Tuple[float, float]
    count: int
    lower_bound: int
    admits: bool
    past_threshold: bool
    first_eigenvalue: float
    first_bound: float
    first_bound_sharp: Optional[float]

    @property
    def holds(self) -> bool:
        ok = self.count >= self.lower_bound
        if self.past_threshold:
            ok = ok and self.count > 0
        ok = ok and self.first_eigenvalue <= self.first_bound * (1 + 1e-12)
        if self.first_bound_sharp is not None:
            ok = ok and self.first_eigenvalue <= self.first_bound_sharp * (1 + 1e-12)
        return ok


@dataclass(frozen=True, eq=False)
class ExistenceReport:
    condition: Optional[ExistenceCondition]
    verdicts: List[ExistenceVerdict]
    count_slope: float

    @property
    def holds(self) -> bool:
        return all(v.holds for v in self.verdicts)


def _three_values(profile):
    if not isinstance(profile, LayeredProfile):
        raise WrongProfileShape("expected a piecewise-constant profile")
    v = profile.values
    if len(v) != 3 or not (v[0] < v[1] < v[2]):
        raise WrongProfileShape(f"expected three increasing values, got {v.tolist()}")
    b = profile.breakpoints
    return float(v[0]), float(v[1]), float(v[2]), float(b[1]), float(b[2]), float(b[3])


def existence_verify(profile: LayeredProfile, eps: float, ks: Sequence[int], cs: CrossSection,
                     rel_tol: float = 1e-10) -> ExistenceReport:
    """Window counts ((c1+eps) mu_k^2, (c2-eps) mu_k^2] per k plus the first-eigenvalue bound.

    The first-eigenvalue bound uses the bottom layer as trial domain with
    eps0 = (c1 - c0)/4: beta_{k,1} <= (c1 - 2 eps0)(mu^2 + (pi/h0)^2), and
    beta_{k,1} <= (c1 - eps0) mu^2 once eps0 mu^2 > (c1 - 2 eps0)(pi/h0)^2.
    A constant profile has an empty window for every k.
    """
    ks = sorted(set(int(k) for k in ks))
    modes = mu_values(cs, max(ks))
    if isinstance(profile, LayeredProfile) and profile.n_layers == 1:
        c = float(profile.values[0])
        out = []
        for k in ks:
            mu = modes[k - 1].mu
            lam1 = eigenvalue_by_index(mu, 1, profile, k=k).lam
            out.append(ExistenceVerdict(k, mu, (c * mu * mu, c * mu * mu), 0, 0, False, False, lam1,
                                        math.inf, None))
        return ExistenceReport(None, out, 0.0)
    c0, c1, c2, h0, h1, H = _three_values(profile)
    cond = existence_condition(c0, c1, c2, h0, h1, H, eps)
    eps0 = 0.25 * (c1 - c0)
    theta1 = (math.pi / h0) ** 2
    out = []
    for k in ks:
        mu = modes[k - 1].mu
        mu2 = mu * mu
        lo, hi = (c1 + eps) * mu2, (c2 - eps) * mu2
        count = len(eigenvalues_in_window(mu, lo, hi, profile, rel_tol=rel_tol, k=k, with_residual=False))
        lam1 = eigenvalue_by_index(mu, 1, profile, rel_tol=rel_tol, k=k).lam
        sharp = (c1 - eps0) * mu2 if eps0 * mu2 > (c1 - 2 * eps0) * theta1 else None
        out.append(ExistenceVerdict(k, mu, (lo, hi), count, cond.count_lower_bound(mu), cond.admits(mu),
                                    mu >= cond.mu_threshold, lam1, (c1 - 2 * eps0) * (mu2 + theta1), sharp))
    mus = [v.mu for v in out]
    slope = regression_slope(mus, [v.count for v in out]) if len(out) > 1 else 0.0
    return ExistenceReport(cond, out, slope)


@dataclass(frozen=True)
class ThreeLayerReport:
    lam: float
    mu: float
    xi: Tuple[float, float, float]
    a0: float
    a1: float
    b1: float
    log_abs_a2: float
    identity_residuals: Tuple[float, float, float]
    xi_ratio_bounds_hold: bool
    scaled_ratio: float         # (a2/a0)^2 exp(2 xi2 (H - h1))
    M1: float
    M2: float
    mass_lower: float           # int_0^h0 u^2
    mass_middle: float          # int_h0^h1 u^2
    mass_ratio_bounds: Tuple[float, float]
    tail_slope: float           # d/da log int_a^H u^2 on (h1, h1 + (H-h1)/2)
    tol: float = 1e-9

    @property
    def mass_ratio(self) -> float:
        return self.mass_lower / self.mass_middle

    @property
    def tail_slope_error(self) -> float:
        return abs(self.tail_slope / (-2.0 * self.xi[2]) - 1.0)

    @property
    def holds(self) -> bool:
        lo, hi = self.mass_ratio_bounds
        return (max(self.identity_residuals) < self.tol and self.M1 <= self.scaled_ratio <= self.M2
                and self.xi_ratio_bounds_hold and lo <= self.mass_ratio <= hi)


def three_layer_ratios(ef: Eigenfunction1D, eps: float, n_tail: int = 9) -> ThreeLayerReport:
    """Closed-form coefficient identities for three increasing layers.

    With u = a0 sin(xi0 y), a1 sin(xi1 y) + b1 cos(xi1 y) and
    a2 sinh(xi2 (H - y)) on the three layers, checks

    * a1^2 + b1^2 = a0^2 (sin^2(xi0 h0) + (xi0/xi1)^2 cos^2(xi0 h0)),
    * a1^2 + b1^2 = a2^2 (sinh^2(xi2 t) + (xi2/xi1)^2 cosh^2(xi2 t)), t = H - h1,
    * their quotient for a2^2 / a0^2,

    and brackets (a2/a0)^2 e^{2 xi2 t} between M1 = min(1, r0_lo)/(1 + r2_hi)
    and M2 = 4 max(1, r0_hi)/r2_lo, where r0, r2 are the bounds on
    (xi0/xi1)^2 and (xi2/xi1)^2 valid inside the window.
    """
    c0, c1, c2, h0, h1, H = _three_values(ef.profile)
    lam, mu2 = ef.lam, ef.mu ** 2
    if not ((c1 + eps) * mu2 < lam < (c2 - eps) * mu2):
        raise OutsideZone(f"lam/mu^2 = {lam / mu2} outside ({c1 + eps}, {c2 - eps})")
    if not (0 < eps < 0.5 * (c2 - c1)):
        raise InvalidOrdering("need 0 < eps < (c2 - c1)/2")
    if tuple(int(k) for k in ef.kind) != (0, 0, 1):
        raise OutsideZone(f"unexpected layer regimes {ef.regimes()}")
    x0, x1, x2 = (float(s) for s in ef.s)
    a0 = ef.p[0] * math.cos(ef.r[0])
    ph = ef.r[1] - x1 * h0
    a1, b1 = ef.p[1] * math.cos(ph), ef.p[1] * math.sin(ph)
    t = H - h1
    R = ef.r[2]
    log_a2 = math.log(abs(2.0 * R)) - x2 * t
    E = math.exp(-2.0 * x2 * t)
    r0 = (x0 / x1) ** 2
    r2 = (x2 / x1) ** 2
    N = math.sin(x0 * h0) ** 2 + r0 * math.cos(x0 * h0) ** 2
    m1 = a1 * a1 + b1 * b1
    rhs1 = a0 * a0 * N
    rhs2 = R * R * ((1.0 - E) ** 2 + r2 * (1.0 + E) ** 2)   # a2^2 (sinh^2 + r2 cosh^2)
    res = (abs(m1 / rhs1 - 1.0), abs(m1 / rhs2 - 1.0), abs(rhs1 / rhs2 - 1.0))

    r2_lo = c1 * eps / (c2 * (c2 - c1 - eps))
    r2_hi = c1 * (c2 - c1 - eps) / (c2 * eps)
    r0_lo = c1 * (c2 - c0 - eps) / (c0 * (c2 - c1 - eps))
    r0_hi = c1 * (c1 - c0 + eps) / (c0 * eps)
    # r0 is decreasing in lam, so its smallest value inside the window is at lam = (c2 - eps) mu^2
    xi_ok = (r2_lo * (1 - 1e-12) <= r2 <= r2_hi * (1 + 1e-12)) and (r0_lo * (1 - 1e-12) <= r0 <= r0_hi * (1 + 1e-12))
    M1 = min(1.0, r0_lo) / (1.0 + r2_hi)
    M2 = 4.0 * max(1.0, r0_hi) / r2_lo
    scaled = 4.0 * R * R / (a0 * a0)

    m_lo = mass(ef, 0.0, h0, weighted=False)
    m_mid = mass(ef, h0, h1, weighted=False)
    # sin^2 averages over a layer of width w lie within w/2 +- 1/(2 xi)
    Nlo, Nhi = min(1.0, r0_lo), max(1.0, r0_hi)
    lo = (h0 - 1.0 / x0) / (Nhi * ((h1 - h0) + 1.0 / x1))
    hi = (h0 + 1.0 / x0) / (Nlo * max((h1 - h0) - 1.0 / x1, 1e-300))
    a_s = np.linspace(h1, h1 + 0.5 * t, n_tail)
    logm = np.log([mass(ef, a, H, weighted=False) for a in a_s])
    slope = regression_slope(a_s, logm)
    return ThreeLayerReport(lam, ef.mu, (x0, x1, x2), float(a0), float(a1), float(b1), float(log_a2), res,
                            bool(xi_ok), float(scaled), M1, M2, m_lo, m_mid, (max(lo, 0.0), hi), slope)


# ---------------------------------------------------------------------------
# approximation of a sampled profile by layers


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    lam: float
    mu: float
    ell: int
    ns: np.ndarray
    lam_n: np.ndarray
    lam_errors: np.ndarray
    u_distances: np.ndarray
    du_distances: np.ndarray
    profile_distances: np.ndarray
    tv: float
    tv_n: np.ndarray
    index_match: np.ndarray
    tol: float

    @property
    def lam_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.lam_errors) < 0))

    @property
    def u_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.u_distances) < 0))

    @property
    def tv_ok(self) -> bool:
        return bool(np.all(self.tv_n <= self.tv * (1 + 1e-12) + 1e-14))

    @property
    def final_ok(self) -> bool:
        return float(self.lam_errors[-1]) < self.tol * self.lam

    @property
    def holds(self) -> bool:
        return self.lam_decreasing and self.u_decreasing and self.tv_ok and self.final_ok


def _reference_index(profile, lam, mu, tol=1e-6) -> int:
    th = gs.pruefer_theta(lam, mu, profile)
    ell = int(round(th / math.pi))
    if ell < 1 or abs(th / math.pi - ell) > tol:
        raise NotAnEigenvalue(f"lam={lam} is not an eigenvalue of the sampled profile")
    return ell


def bv_convergence(profile: SampledProfile, lam: float, mu: float, n_list: Sequence[int],
                   rule: str = "midpoint", tol: float = 1e-4, n_eval: int = 2001) -> ConvergenceReport:
    """Eigenpairs of piecewise-constant approximations converging to a target pair.

    For every n the nearest eigenvalue of ``pc_approximate(profile, n)`` is
    searched in a window of half-width lam * delta / (c_m - delta), where
    delta is the sup distance of the approximation; the weighted Rayleigh
    quotients of the two operators differ by at most that factor.
    """
    ns = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_list must be increasing")
    ell = _reference_index(profile, lam, mu)
    c_m, _ = extremes(profile)
    y = np.linspace(0.0, profile.H, n_eval)
    u_ref, du_ref = gs.normalized_solution(profile, lam, mu, y)
    tv = total_variation(profile)
    out = dict(lam=[], err=[], du=[], u=[], dist=[], tv=[], idx=[])
    for n in ns:
        pc = pc_approximate(profile, n, rule)
        delta = sup_distance(profile, pc)
        w = lam * (1.01 * delta / max(c_m - delta, 1e-300)) + 1e-12 * lam
        cands = eigenvalues_in_window(mu, max(lam - w, 1e-300), lam + w, pc, with_residual=False)
        if not cands:
            raise NoNearbyEigenvalue(f"no eigenvalue of the n={n} approximation within {w:.3e} of {lam}")
        best = min(cands, key=lambda p: abs(p.lam - lam))
        ef = build_eigenfunction(best, pc)
        u, du = evaluate(ef, y)
        sgn = 1.0 if np.dot(u, u_ref) >= 0 else -1.0
        out["lam"].append(best.lam)
        out["err"].append(abs(best.lam - lam))
        out["u"].append(float(np.max(np.abs(sgn * u - u_ref))))
        out["du"].append(float(np.max(np.abs(sgn * du - du_ref))))
        out["dist"].append(delta)
        out["tv"].append(total_variation(pc))
        out["idx"].append(best.ell == ell)
    return ConvergenceReport(float(lam), float(mu), ell, np.array(ns), np.array(out["lam"]), np.array(out["err"]),
                             np.array(out["u"]), np.array(out["du"]), np.array(out["dist"]), tv,
                             np.array(out["tv"]), np.array(out["idx"]), tol)


# ---------------------------------------------------------------------------
# full-domain mass ratio


def mass_ratio_3d(ef: Eigenfunction1D, r_perp: float, band: Tuple[float, float]) -> float:
    """R_omega for omega = omega' x (a, b) and a product eigenfunction phi_k u."""
    if not 0.0 <= r_perp <= 1.0:
        raise ValueError("transverse ratio must lie in [0, 1]")
    return float(r_perp * mass(ef, float(band[0]), float(band[1]), weighted=True))
