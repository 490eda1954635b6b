"""Exact spectral solver for piecewise-constant coefficients.

On a layer where c is constant the reduced equation

    u'' + q u = 0,   q = lam / c - mu^2,

has closed-form solutions, so the Dirichlet shooting map from y = 0 to
y = H is a product of 2x2 propagators.  The state carries a base-2
exponent so that evanescent growth over many layers cannot overflow.

Eigenvalues are bracketed with the oscillation count (number of zeros of
the shooting solution in (0, H], which equals the number of eigenvalues
not exceeding lam) and refined with Brent's method on a continuous,
scale-free version of u(H).

Eigenfunctions are assembled from a forward shot and a backward shot
joined where they agree best.  Each evanescent layer is stored as a sum
of two exponentials anchored at opposite ends, so decaying tails keep full
relative accuracy even when the shooting problem itself is ill-conditioned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure, DegenerateState, NotAnEigenvalue, OutOfDomain
from .profile import LayeredProfile, extremes

OSCILLATORY = "Oscillatory"
EVANESCENT = "Evanescent"
LINEAR = "Linear"

_LN2 = math.log(2.0)
_BIG = 20.0  # beyond this many e-folds an evanescent step is done in scaled form
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class LayerRegime:
    tag: str
    q: float
    wavenumber: float


def default_tol_q(mu: float) -> float:
    return 1e-9 * max(mu * mu, 1e-300)


def layer_regime(lam: float, mu: float, c: float, tol_q: Optional[float] = None) -> LayerRegime:
    """Classify one layer by the sign of q = lam/c - mu^2."""
    if tol_q is None:
        tol_q = default_tol_q(mu)
    q = lam / c - mu * mu
    if q > tol_q:
        return LayerRegime(OSCILLATORY, q, math.sqrt(q))
    if q < -tol_q:
        return LayerRegime(EVANESCENT, q, math.sqrt(-q))
    return LayerRegime(LINEAR, q, math.sqrt(abs(q)))


@dataclass(frozen=True)
class StateVector:
    """(u, du) * 2**exponent."""

    u: float
    du: float
    exponent: int = 0

    def values(self) -> Tuple[float, float]:
        return math.ldexp(self.u, self.exponent), math.ldexp(self.du, self.exponent)


# ---------------------------------------------------------------------------
# single-layer stepping


def _series_cs(q: float, t: float) -> Tuple[float, float]:
    """cos(sqrt(q) t) and sin(sqrt(q) t)/sqrt(q) for small |q| t^2."""
    z = q * t * t
    c = 1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0
    s = t * (1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0)
    return c, s


def _step(u: float, du: float, q: float, t: float, tol_q: float):
    """Advance (u, du) over a constant-q stretch of length t > 0.

    Returns (u1, du1, extra_exponent, zeros) where zeros counts roots of u
    in the half-open stretch (0, t].
    """
    if q > tol_q:
        s = math.sqrt(q)
        phi = s * t
        w = du / s
        psi0 = math.atan2(u, w)
        zeros = math.floor((psi0 + phi) / math.pi) - math.floor(psi0 / math.pi)
        cp, sp = math.cos(phi), math.sin(phi)
        return u * cp + w * sp, (w * cp - u * sp) * s, 0, int(zeros)
    if q < -tol_q:
        s = math.sqrt(-q)
        g = s * t
        w = du / s
        P = 0.5 * (u + w)
        M = 0.5 * (u - w)
        zeros = 0
        if P * M < 0.0 and abs(M) > abs(P):
            # root at exp(2 s x) = -M/P
            if math.log(abs(M)) - math.log(abs(P)) <= 2.0 * g:
                zeros = 1
        # growing/decaying split instead of cosh/sinh: u ch + w sh cancels
        # to zero when the incoming state is (nearly) pure decay
        if g < _BIG:
            eg = math.exp(g)
            ep, em = P * eg, M / eg
            return ep + em, s * (ep - em), 0, zeros
        # u1 = P e^g + M e^-g; scale by 2^-n chosen from the larger term so
        # that neither term underflows to zero when the other vanishes.
        lp = math.log(abs(P)) + g if P != 0.0 else -math.inf
        lm = math.log(abs(M)) - g if M != 0.0 else -math.inf
        n = int(math.floor(max(lp, lm) / _LN2))
        ep = math.copysign(math.exp(lp - n * _LN2), P) if P != 0.0 else 0.0
        em = math.copysign(math.exp(lm - n * _LN2), M) if M != 0.0 else 0.0
        return ep + em, s * (ep - em), n, zeros
    c, sq = _series_cs(q, t)
    u1 = u * c + du * sq
    du1 = du * c - u * q * sq
    zeros = 1 if (u != 0.0 and (u1 == 0.0 or (u1 > 0.0) != (u > 0.0))) else 0
    return u1, du1, 0, zeros


def _renorm(u: float, du: float, e: int):
    m = max(abs(u), abs(du))
    if m == 0.0 or not math.isfinite(m):
        raise DegenerateState(f"state collapsed to ({u}, {du}) during propagation")
    k = math.frexp(m)[1]
    return math.ldexp(u, -k), math.ldexp(du, -k), e + k


def _shoot(lam, mu, b, v, tol_q, u=0.0, du=1.0, e=0, record=False):
    mu2 = mu * mu
    count = 0
    states = [(u, du, e)] if record else None
    for j in range(len(v)):
        q = lam / v[j] - mu2
        u, du, de, z = _step(u, du, q, b[j + 1] - b[j], tol_q)
        count += z
        u, du, e = _renorm(u, du, e + de)
        if record:
            states.append((u, du, e))
    return u, du, e, count, states


def _shoot_back(lam, mu, b, v, tol_q):
    """Backward shot from y = H with (u, du) = (0, -1); states at every breakpoint."""
    mu2 = mu * mu
    u, du, e = 0.0, -1.0, 0
    states = [(u, du, e)]
    for j in range(len(v) - 1, -1, -1):
        q = lam / v[j] - mu2
        # reflect y -> -y: (u, du) -> (u, -du)
        u1, du1, de, _ = _step(u, -du, q, b[j + 1] - b[j], tol_q)
        u, du, e = _renorm(u1, -du1, e + de)
        states.append((u, du, e))
    states.reverse()
    return states


def _profile_arrays(profile: LayeredProfile):
    return profile.breakpoints.tolist(), profile.values.tolist()


def propagate(lam: float, mu: float, profile: LayeredProfile, state: Optional[StateVector] = None,
              tol_q: Optional[float] = None) -> Tuple[StateVector, int]:
    """Shoot from y = 0 to y = H.

    Returns the state at H and the number of zeros of u in (0, H].
    """
    if state is None:
        state = StateVector(0.0, 1.0, 0)
    if tol_q is None:
        tol_q = default_tol_q(mu)
    b, v = _profile_arrays(profile)
    u, du, e, count, _ = _shoot(lam, mu, b, v, tol_q, state.u, state.du, state.exponent)
    return StateVector(u, du, e), count


def _freq_scale(lam, mu, c):
    return math.sqrt(max(abs(lam / c - mu * mu), mu * mu, 1e-300))


def _dispersion(lam, mu, b, v, tol_q):
    u, du, _, count, _ = _shoot(lam, mu, b, v, tol_q)
    sigma = _freq_scale(lam, mu, v[-1])
    return u / math.hypot(u, du / sigma), count


def dispersion(lam: float, mu: float, profile: LayeredProfile, tol_q: Optional[float] = None) -> Tuple[float, int]:
    """Scale-free shooting value at H and the oscillation count.

    The value is u(H) / |(u(H), u'(H)/sigma)| with sigma a local frequency
    of the top layer: it has the sign of u(H), vanishes exactly at the
    eigenvalues and is continuous in lam.
    """
    if tol_q is None:
        tol_q = default_tol_q(mu)
    b, v = _profile_arrays(profile)
    return _dispersion(lam, mu, b, v, tol_q)


def zero_count(lam: float, mu: float, profile: LayeredProfile, tol_q: Optional[float] = None) -> int:
    return dispersion(lam, mu, profile, tol_q)[1]


# ---------------------------------------------------------------------------
# eigenvalues


@dataclass(frozen=True)
class Eigenpair:
    lam: float
    mu: float
    ell: int
    k: Optional[int] = None
    residual: float = 0.0


class _Counter:
    def __init__(self, mu, profile, tol_q):
        self.mu = mu
        self.b, self.v = _profile_arrays(profile)
        self.tol_q = tol_q
        self.cache: Dict[float, Tuple[float, int]] = {}

    def __call__(self, lam):
        r = self.cache.get(lam)
        if r is None:
            r = _dispersion(lam, self.mu, self.b, self.v, self.tol_q)
            self.cache[lam] = r
        return r


def _refine(F: _Counter, a: float, b: float, ell: int, rel_tol: float) -> float:
    """Locate the eigenvalue with index ell inside (a, b]."""
    fa, _ = F(a)
    fb, _ = F(b)
    if fa == 0.0:
        fa = math.copysign(_EPS, -fb)
    if fb != 0.0 and (fa > 0.0) == (fb > 0.0):
        return _count_bisect(F, a, b, ell, rel_tol)
    if fb == 0.0:
        return b
    rtol = max(min(rel_tol, 1e-12) * 1e-3, 4.0 * _EPS)
    lam = brentq(lambda x: F(x)[0], a, b, xtol=1e-300, rtol=rtol, maxiter=500)
    return lam


def _count_bisect(F: _Counter, a: float, b: float, ell: int, rel_tol: float) -> float:
    while b - a > rel_tol * abs(b):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if F(m)[1] >= ell:
            b = m
        else:
            a = m
    return 0.5 * (a + b)


def _isolate(F: _Counter, a: float, na: int, b: float, nb: int, out: list, rel_tol: float, depth=0):
    if nb <= na:
        return
    if nb - na == 1:
        out.append((na + 1, _refine(F, a, b, na + 1, rel_tol)))
        return
    m = 0.5 * (a + b)
    if depth > 200 or m <= a or m >= b:
        raise BracketFailure(f"could not separate {nb - na} eigenvalues in ({a}, {b})")
    nm = F(m)[1]
    _isolate(F, a, na, m, nm, out, rel_tol, depth + 1)
    _isolate(F, m, nm, b, nb, out, rel_tol, depth + 1)


def eigenvalues_in_window(mu: float, lam_lo: float, lam_hi: float, profile: LayeredProfile,
                          rel_tol: float = 1e-12, k: Optional[int] = None,
                          tol_q: Optional[float] = None, with_residual: bool = True) -> List[Eigenpair]:
    """All eigenvalues of the reduced operator in (lam_lo, lam_hi].

    The number returned always equals ``zero_count(lam_hi) - zero_count(lam_lo)``.
    """
    if not (0 < lam_lo < lam_hi):
        raise ValueError("window must satisfy 0 < lam_lo < lam_hi")
    if tol_q is None:
        tol_q = default_tol_q(mu)
    F = _Counter(mu, profile, tol_q)
    na, nb = F(lam_lo)[1], F(lam_hi)[1]
    found: list = []
    _isolate(F, lam_lo, na, lam_hi, nb, found, rel_tol)
    found.sort()
    pairs = []
    for ell, lam in found:
        res = matching_residual(lam, mu, profile, tol_q) if with_residual else 0.0
        pairs.append(Eigenpair(float(lam), float(mu), int(ell), k, res))
    return pairs


def eigenvalue_bounds(mu: float, ell: int, profile: LayeredProfile) -> Tuple[float, float]:
    """Bracket (lo, hi] guaranteed to contain the eigenvalue with index ell."""
    c_m, c_M = extremes(profile)
    H = profile.H
    lo = c_m * mu * mu * (1.0 - 1e-12)
    hi = c_M * (mu * mu + (ell * math.pi / H) ** 2) * (1.0 + 1e-12)
    return lo, hi


def eigenvalue_by_index(mu: float, ell: int, profile: LayeredProfile, rel_tol: float = 1e-12,
                        k: Optional[int] = None, tol_q: Optional[float] = None) -> Eigenpair:
    """The ell-th eigenvalue (1-based) of the reduced operator."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if tol_q is None:
        tol_q = default_tol_q(mu)
    F = _Counter(mu, profile, tol_q)
    a, b = eigenvalue_bounds(mu, ell, profile)
    while F(a)[1] >= ell:  # pragma: no cover - the bound is rigorous
        a *= 0.5
    while F(b)[1] < ell:  # pragma: no cover
        b *= 2.0
    # shrink until the bracket holds exactly one eigenvalue
    for _ in range(400):
        na, nb = F(a)[1], F(b)[1]
        if na == ell - 1 and nb == ell:
            break
        m = 0.5 * (a + b)
        if F(m)[1] >= ell:
            b = m
        else:
            a = m
    else:  # pragma: no cover
        raise BracketFailure(f"could not isolate eigenvalue {ell}")
    lam = _refine(F, a, b, ell, rel_tol)
    return Eigenpair(float(lam), float(mu), int(ell), k, matching_residual(lam, mu, profile, tol_q))


# ---------------------------------------------------------------------------
# two-sided matching


def _metric_states(lam, mu, b, v, tol_q):
    _, _, _, _, left = _shoot(lam, mu, b, v, tol_q, record=True)
    right = _shoot_back(lam, mu, b, v, tol_q)
    sig = []
    for i in range(len(b)):
        cs = [v[j] for j in (i - 1, i) if 0 <= j < len(v)]
        sig.append(max(_freq_scale(lam, mu, c) for c in cs))
    return left, right, sig


def _mismatch(Ls, Rs, sigma):
    lu, ldu = Ls[0], Ls[1] / sigma
    ru, rdu = Rs[0], Rs[1] / sigma
    return abs(lu * rdu - ldu * ru) / (math.hypot(lu, ldu) * math.hypot(ru, rdu))


def _best_match(left, right, sig):
    mism = [_mismatch(L, R, s) for L, R, s in zip(left, right, sig)]
    m = int(np.argmin(mism))
    return m, mism[m]


def matching_residual(lam: float, mu: float, profile: LayeredProfile, tol_q: Optional[float] = None) -> float:
    """Sine of the angle between forward and backward shots at the best breakpoint.

    Zero exactly at an eigenvalue; unlike u(H) it stays well conditioned
    when the mode decays through thick evanescent layers.
    """
    if tol_q is None:
        tol_q = default_tol_q(mu)
    b, v = _profile_arrays(profile)
    left, right, sig = _metric_states(lam, mu, b, v, tol_q)
    return float(_best_match(left, right, sig)[1])


# ---------------------------------------------------------------------------
# eigenfunctions

_KIND = {OSCILLATORY: 0, EVANESCENT: 1, LINEAR: 2}
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True, eq=False)
class Eigenfunction1D:
    """Normalized eigenfunction with one closed form per layer.

    Per layer j (between ``y0[j]`` and ``y1[j]``) the stored pair ``(p, r)``
    means

    * oscillatory: u = p sin(s (y - y0) + r), so beta_j = |p| and the
      phase offset gamma_j = y0 - r/s;
    * evanescent:  u = p exp(-s (y1 - y)) + r exp(-s (y - y0));
    * linear:      u = p C(y - y0) + r S(y - y0) with the even/odd
      solutions C, S of u'' + q u = 0 (q tiny).

    The normalization is the weighted one, int u^2 / c dy = 1.
    """

    lam: float
    mu: float
    ell: int
    k: Optional[int]
    profile: LayeredProfile
    kind: np.ndarray
    q: np.ndarray
    s: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    p: np.ndarray
    r: np.ndarray
    match_index: int
    residual: float
    transmission_residual: float
    tol_q: float = 0.0

    @property
    def H(self) -> float:
        return self.profile.H

    @property
    def n_layers(self) -> int:
        return len(self.kind)

    def regimes(self) -> List[str]:
        names = {0: OSCILLATORY, 1: EVANESCENT, 2: LINEAR}
        return [names[int(x)] for x in self.kind]

    @property
    def beta(self) -> np.ndarray:
        """Oscillatory amplitudes |beta_j| (NaN for other layers)."""
        return np.where(self.kind == 0, np.abs(self.p), np.nan)

    @property
    def gamma(self) -> np.ndarray:
        """Phase offsets gamma_j with u = beta_j sin(s_j (y - gamma_j)) (NaN for other layers)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            g = self.y0 - self.r / self.s
        # sign of p is absorbed by a half-period shift of gamma
        g = np.where(self.p < 0, g - np.pi / self.s, g)
        return np.where(self.kind == 0, g, np.nan)

    def cosh_sinh(self, j: int) -> Tuple[float, float]:
        """(A_j, B_j) with u = A cosh(s (y-y0)) + B sinh(s (y-y0)) on an evanescent layer."""
        if self.kind[j] != 1:
            raise ValueError(f"layer {j} is not evanescent")
        u0, du0 = self.layer_state(j, self.y0[j])
        return u0, du0 / self.s[j]

    def layer_state(self, j: int, y) -> Tuple[np.ndarray, np.ndarray]:
        """Closed form of layer j evaluated at y (may lie slightly outside the layer)."""
        y = np.asarray(y, dtype=float)
        kd, s, p, r = self.kind[j], self.s[j], self.p[j], self.r[j]
        x = y - self.y0[j]
        if kd == 0:
            ph = s * x + r
            return p * np.sin(ph), p * s * np.cos(ph)
        if kd == 1:
            ep = np.exp(-s * (self.y1[j] - y))
            em = np.exp(-s * x)
            return p * ep + r * em, s * (p * ep - r * em)
        q = self.q[j]
        c, sq = _series_cs_vec(q, x)
        return p * c + r * sq, r * c - p * q * sq

    def __call__(self, y):
        return evaluate(self, y)[0]


def _series_cs_vec(q, x):
    z = q * x * x
    c = 1.0 - z / 2.0 + z * z / 24.0 - z * z * z / 720.0
    s = x * (1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0)
    return c, s


def _layer_integral(ef: Eigenfunction1D, j: int, a: float, b: float) -> float:
    """Integral of u^2 over [a, b] inside layer j."""
    if b <= a:
        return 0.0
    kd, s, p, r = ef.kind[j], ef.s[j], ef.p[j], ef.r[j]
    y0, y1 = ef.y0[j], ef.y1[j]
    if kd == 0:
        pa, pb = s * (a - y0) + r, s * (b - y0) + r
        return 0.5 * p * p * ((b - a) - (math.sin(2 * pb) - math.sin(2 * pa)) / (2 * s))
    if kd == 1:
        w = b - a
        em = -math.expm1(-2.0 * s * w)  # 1 - exp(-2 s w)
        ip = p * p * math.exp(-2.0 * s * (y1 - b)) * em / (2.0 * s)
        ir = r * r * math.exp(-2.0 * s * (a - y0)) * em / (2.0 * s)
        ic = 2.0 * p * r * math.exp(-s * (y1 - y0)) * w
        return max(ip + ir + ic, 0.0)
    xm, xr = 0.5 * (a + b), 0.5 * (b - a)
    uu = ef.layer_state(j, xm + xr * _GL_X)[0]
    return float(xr * np.dot(_GL_W, uu * uu))


def build_eigenfunction(pair: Eigenpair, profile: LayeredProfile, tol: float = 1e-6,
                        tol_q: Optional[float] = None) -> Eigenfunction1D:
    """Assemble and normalize the eigenfunction for an eigenpair.

    Raises
    ------
    NotAnEigenvalue
        If forward and backward shots disagree by more than ``tol`` (sine
        of the angle between them) at every breakpoint.
    """
    lam, mu = pair.lam, pair.mu
    if tol_q is None:
        tol_q = default_tol_q(mu)
    b, v = _profile_arrays(profile)
    left, right, sig = _metric_states(lam, mu, b, v, tol_q)
    m, res = _best_match(left, right, sig)
    if not res <= tol:
        raise NotAnEigenvalue(f"lam={lam} is not an eigenvalue (matching residual {res:.3e})")

    # scale the backward shot onto the forward one at breakpoint m
    lu, ldu, le = left[m]
    ru, rdu, re = right[m]
    s2 = sig[m] ** 2
    kap = (lu * ru + ldu * rdu / s2) / (ru * ru + rdu * rdu / s2)
    states = []
    for i in range(len(b)):
        if i <= m:
            states.append(left[i])
        else:
            u, du, e = right[i]
            states.append((u * kap, du * kap, e + le - re))
    emax = max(e for _, _, e in states)
    U = np.array([math.ldexp(u, e - emax) for u, _, e in states])
    D = np.array([math.ldexp(du, e - emax) for _, du, e in states])

    n = len(v)
    mu2 = mu * mu
    kind = np.empty(n, dtype=int)
    q = np.empty(n)
    s = np.empty(n)
    P = np.empty(n)
    R = np.empty(n)
    for j in range(n):
        q[j] = lam / v[j] - mu2
        reg = layer_regime(lam, mu, v[j], tol_q)
        kind[j] = _KIND[reg.tag]
        s[j] = reg.wavenumber
        if kind[j] == 0:
            w = D[j] / s[j]
            P[j] = math.hypot(U[j], w)
            R[j] = math.atan2(U[j], w)
        elif kind[j] == 1:
            P[j] = 0.5 * (U[j + 1] + D[j + 1] / s[j])
            R[j] = 0.5 * (U[j] - D[j] / s[j])
        else:
            P[j], R[j] = U[j], D[j]
    y0 = np.array(b[:-1])
    y1 = np.array(b[1:])
    ef = Eigenfunction1D(lam, mu, pair.ell, pair.k, profile, kind, q, s, y0, y1, P, R, m, res, 0.0, tol_q)
    norm2 = sum(_layer_integral(ef, j, y0[j], y1[j]) / v[j] for j in range(n))
    scale = 1.0 / math.sqrt(norm2)
    # oscillatory amplitude is stored positive; the phase carries the sign
    Pn, Rn = P * scale, np.where(kind == 0, R, R * scale)
    ef = Eigenfunction1D(lam, mu, pair.ell, pair.k, profile, kind, q, s, y0, y1, Pn, Rn, m, res, 0.0, tol_q)
    tr = max(interface_residuals(ef), default=0.0)
    return Eigenfunction1D(lam, mu, pair.ell, pair.k, profile, kind, q, s, y0, y1, Pn, Rn, m, res, tr, tol_q)


def interface_residuals(ef: Eigenfunction1D) -> List[float]:
    """(|u+ - u-| + |du+ - du-|/sigma) / local amplitude at every interface."""
    out = []
    for j in range(ef.n_layers - 1):
        h = ef.y1[j]
        ul, dl = ef.layer_state(j, h)
        ur, dr = ef.layer_state(j + 1, h)
        sigma = max(ef.s[j], ef.s[j + 1], ef.mu, 1e-300)
        amp = max(math.hypot(float(ul), float(dl) / sigma), math.hypot(float(ur), float(dr) / sigma), 1e-300)
        out.append((abs(ul - ur) + abs(dl - dr) / sigma) / amp)
    return out


def evaluate(ef: Eigenfunction1D, y):
    """u and u' at y (scalar or array)."""
    ya = np.asarray(y, dtype=float)
    H = ef.H
    tol = 1e-13 * H
    if np.any(ya < -tol) or np.any(ya > H + tol):
        raise OutOfDomain(f"y outside [0, {H}]")
    ya = np.clip(ya, 0.0, H)
    idx = ef.profile.layer_index(ya)
    u = np.empty_like(ya)
    du = np.empty_like(ya)
    for j in np.unique(idx):
        sel = idx == j
        uj, dj = ef.layer_state(int(j), ya[sel])
        u[sel] = uj
        du[sel] = dj
    if np.ndim(y) == 0:
        return float(u), float(du)
    return u, du


def mass(ef: Eigenfunction1D, a: float, b: float, weighted: bool = True) -> float:
    """Integral of u^2 (or u^2 / c) over (a, b), split at the breakpoints."""
    H = ef.H
    if not (0.0 <= a <= b <= H * (1 + 1e-14)):
        raise OutOfDomain(f"band ({a}, {b}) outside [0, {H}]")
    b = min(b, H)
    total = 0.0
    vals = ef.profile.values
    for j in range(ef.n_layers):
        lo, hi = max(a, ef.y0[j]), min(b, ef.y1[j])
        if hi > lo:
            part = _layer_integral(ef, j, lo, hi)
            total += part / vals[j] if weighted else part
    return float(total)


def eigenpairs(mu: float, profile: LayeredProfile, lam_lo: float, lam_hi: float, k: Optional[int] = None,
               rel_tol: float = 1e-12) -> List[Eigenfunction1D]:
    """Convenience: eigenfunctions for every eigenvalue in (lam_lo, lam_hi]."""
    return [build_eigenfunction(p, profile) for p in
            eigenvalues_in_window(mu, lam_lo, lam_hi, profile, rel_tol=rel_tol, k=k)]
