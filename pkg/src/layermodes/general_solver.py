"""Solver paths for sampled (non piecewise-constant) profiles.

* Modified Prüfer phase integration: eigenvalue counting and refinement.
* Finite-difference oracle: an independent brute-force check.
* Numerov and high-order ODE integration of the reduced equation.
* The Liouville frame xi = int sqrt(p), eta = p^(1/4) u with its potential rho.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from numba import njit
from scipy.integrate import cumulative_trapezoid, solve_ivp, trapezoid
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import GridTooCoarse, MissingDerivatives, OutsideSpectralWindow, SchemaError, StepFailure
from .layer_solver import Eigenpair
from .profile import LayeredProfile, SampledProfile, extremes

# ---------------------------------------------------------------------------
# Prüfer phase

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_HALF_PI = 0.5 * math.pi


@njit(cache=True)
def _remap(theta, ratio):
    """Phase for tan(theta_new) = ratio * tan(theta), same quarter-turn."""
    j = math.floor(theta / _HALF_PI)
    phi = theta - j * _HALF_PI
    if j % 2 == 0:
        phi = math.atan(ratio * math.tan(phi))
    else:
        # theta = odd * pi/2 + phi, tan(theta) = -cot(phi)
        phi = math.atan(math.tan(phi) / ratio)
    return j * _HALF_PI + phi


@njit(cache=True)
def _rhs(y, th, alpha, lam, mu2, y0, ca, slope):
    c = ca + slope * (y - y0)
    q = lam / c - mu2
    s = math.sin(th)
    co = math.cos(th)
    return alpha * co * co + (q / alpha) * s * s


@njit(cache=True)
def _pruefer_kernel(grid, samples, linear, lam, mu2, atol, frac, max_steps, A, B5, B4, C):
    theta = 0.0
    alpha_prev = -1.0
    steps = 0
    H = grid[-1]
    hmin = 1e-14 * H
    k = np.empty(7)
    for i in range(len(grid) - 1):
        y0 = grid[i]
        y1 = grid[i + 1]
        ca = samples[i]
        cb = samples[i + 1] if linear else ca
        slope = (cb - ca) / (y1 - y0)
        qa = lam / ca - mu2
        qb = lam / cb - mu2
        qm = lam / (0.5 * (ca + cb)) - mu2
        if qa > 0.0 and qb > 0.0:
            alpha = math.sqrt(qm)
        elif qa < 0.0 and qb < 0.0:
            alpha = math.sqrt(-qm)
        else:
            alpha = 1.0
        if alpha_prev > 0.0 and alpha != alpha_prev:
            theta = _remap(theta, alpha / alpha_prev)
        alpha_prev = alpha
        qmax = max(abs(qa), abs(qb))
        freq = max(alpha, qmax / alpha, math.sqrt(qmax), 1e-300)
        hmax = frac * 2.0 * math.pi / freq
        y = y0
        h = min(hmax, y1 - y0)
        while y < y1:
            if y + h > y1:
                h = y1 - y
            for s in range(7):
                acc = theta
                for m in range(s):
                    acc += h * A[s, m] * k[m]
                k[s] = _rhs(y + C[s] * h, acc, alpha, lam, mu2, y0, ca, slope)
            t5 = theta
            t4 = theta
            for s in range(7):
                t5 += h * B5[s] * k[s]
                t4 += h * B4[s] * k[s]
            err = abs(t5 - t4)
            steps += 1
            if steps > max_steps:
                return theta, alpha_prev, 1
            if err <= atol or h <= hmin:
                if err > atol:
                    return theta, alpha_prev, 2
                y += h
                theta = t5
                fac = 5.0 if err == 0.0 else min(5.0, 0.9 * (atol / err) ** 0.2)
                h = min(hmax, h * fac)
            else:
                h = h * max(0.2, 0.9 * (atol / err) ** 0.2)
    return theta, alpha_prev, 0


@dataclass(frozen=True)
class PrueferResult:
    zero_count: int
    sign: int
    theta: float
    boundary: bool


def _as_sampled(profile: Union[SampledProfile, LayeredProfile]) -> SampledProfile:
    if isinstance(profile, LayeredProfile):
        return SampledProfile.from_layered(profile)
    return profile


def pruefer_theta(lam: float, mu: float, profile, atol: float = 1e-11, frac: float = 0.25,
                  max_steps: int = 50_000_000) -> float:
    """Prüfer phase at y = H (multiples of pi mark the zeros of u)."""
    sp = _as_sampled(profile)
    theta, _, status = _pruefer_kernel(sp.grid, sp.samples, sp.interpolation == "piecewise-linear",
                                       float(lam), float(mu) ** 2, atol, frac, max_steps, _A, _B5, _B4, _C)
    if status == 1:
        raise StepFailure(f"step budget exhausted at lam={lam}")
    if status == 2:
        raise StepFailure(f"step size underflow at lam={lam}")
    return float(theta)


def pruefer_count(lam: float, mu: float, profile, atol: float = 1e-11, frac: float = 0.25,
                  boundary_tol: float = 1e-7) -> PrueferResult:
    """Zeros of the Dirichlet shooting solution in (0, H] and the sign of u(H).

    ``boundary`` flags lam values within ``boundary_tol`` (in phase) of an
    eigenvalue, where the count is decided by rounding.
    """
    th = pruefer_theta(lam, mu, profile, atol, frac)
    n = int(math.floor(th / math.pi))
    d = th - n * math.pi
    boundary = min(d, math.pi - d) < boundary_tol
    s = math.sin(th)
    return PrueferResult(n, 0 if s == 0.0 else int(math.copysign(1, s)), th, boundary)


def eigenvalues_pruefer(mu: float, lam_lo: float, lam_hi: float, profile, k: Optional[int] = None,
                        atol: float = 1e-11, rel_tol: float = 1e-13) -> List[Eigenpair]:
    """Eigenvalues in (lam_lo, lam_hi] located as the roots of theta(H) = l pi."""
    th = lambda lam: pruefer_theta(lam, mu, profile, atol)
    t_lo, t_hi = th(lam_lo), th(lam_hi)
    n_lo, n_hi = int(math.floor(t_lo / math.pi)), int(math.floor(t_hi / math.pi))
    out = []
    a = lam_lo
    for ell in range(n_lo + 1, n_hi + 1):
        target = ell * math.pi
        g = lambda lam: th(lam) - target
        lam = brentq(g, a, lam_hi, xtol=1e-300, rtol=max(rel_tol, 4 * np.finfo(float).eps), maxiter=300)
        out.append(Eigenpair(float(lam), float(mu), ell, k, abs(g(lam))))
        a = lam
    return out


# ---------------------------------------------------------------------------
# finite-difference oracle


@dataclass(frozen=True)
class FDEigenvalue:
    index: int
    lam_fine: float
    lam_coarse: float
    lam: float
    error: float


def _fd_weights(profile, n: int) -> np.ndarray:
    H = profile.H
    h = H / n
    y = np.linspace(0.0, H, n + 1)[1:-1]
    if isinstance(profile, LayeredProfile):
        # exact average of 1/c over the dual cell [y - h/2, y + h/2]
        b, v = profile.breakpoints, profile.values
        cum = np.concatenate(([0.0], np.cumsum(np.diff(b) / v)))
        F = lambda x: np.interp(x, b, cum)
        return (F(y + 0.5 * h) - F(y - 0.5 * h)) / h
    return 1.0 / profile(y)


def _fd_pencil(mu: float, profile, n: int):
    h = profile.H / n
    w = _fd_weights(profile, n)
    d = (2.0 / h ** 2 + mu * mu) / w
    e = -1.0 / (h ** 2 * np.sqrt(w[:-1] * w[1:]))
    return d, e


def fd_oracle(mu: float, profile, lam_lo: float, lam_hi: float, grid_n: int = 4096,
              check_resolution: bool = True) -> List[FDEigenvalue]:
    """Finite-difference eigenvalues in (lam_lo, lam_hi] with Richardson extrapolation.

    ``-u'' + mu^2 u = lam u / c`` is discretized with central differences on
    ``grid_n`` cells; the symmetric tridiagonal matrix is diagonalized in the
    window by Sturm-sequence bisection (LAPACK stebz).  The same indices
    are recomputed on ``grid_n/2`` cells; the extrapolated value is
    lam_n + (lam_n - lam_{n/2})/3 and ``error`` is the size of that correction.
    """
    if grid_n < 64 or grid_n % 2:
        raise ValueError("grid_n must be an even integer >= 64")
    c_m, _ = extremes(profile)
    h = profile.H / grid_n
    kmax = math.sqrt(max(lam_hi / c_m - mu * mu, 0.0))
    if check_resolution and kmax > 0 and (2 * math.pi / kmax) / h < 8:
        raise GridTooCoarse(
            f"{(2 * math.pi / kmax) / h:.2f} points per wavelength at lam={lam_hi}; need >= 8")
    d, e = _fd_pencil(mu, profile, grid_n)
    fine = eigh_tridiagonal(d, e, eigvals_only=True, select="v", select_range=(lam_lo, lam_hi),
                            lapack_driver="stebz")
    if len(fine) == 0:
        return []
    below = eigh_tridiagonal(d, e, eigvals_only=True, select="v", select_range=(0.0, lam_lo),
                             lapack_driver="stebz")
    i0 = len(below)
    dc, ec = _fd_pencil(mu, profile, grid_n // 2)
    coarse = eigh_tridiagonal(dc, ec, eigvals_only=True, select="i",
                              select_range=(i0, i0 + len(fine) - 1), lapack_driver="stebz")
    out = []
    for j, (lf, lc) in enumerate(zip(fine, coarse)):
        corr = (lf - lc) / 3.0
        out.append(FDEigenvalue(i0 + j + 1, float(lf), float(lc), float(lf + corr), float(abs(corr))))
    return out


def fd_count(mu: float, profile, lam: float, grid_n: int) -> int:
    """Number of discrete eigenvalues not exceeding lam."""
    d, e = _fd_pencil(mu, profile, grid_n)
    return len(eigh_tridiagonal(d, e, eigvals_only=True, select="v", select_range=(0.0, lam),
                                lapack_driver="stebz"))


# ---------------------------------------------------------------------------
# direct integration of the reduced equation


def _q_and_derivs(profile: SampledProfile, lam: float, mu: float):
    c = profile.samples
    Q = lam / c - mu * mu
    if profile.has_derivatives:
        dc, ddc = profile.dsamples, profile.ddsamples
    else:
        dc = np.gradient(c, profile.grid)
        ddc = np.gradient(dc, profile.grid)
    dQ = -lam * dc / c ** 2
    ddQ = -lam * (ddc / c ** 2 - 2 * dc ** 2 / c ** 3)
    return Q, dQ, ddQ


def _require_uniform(profile: SampledProfile) -> float:
    h = np.diff(profile.grid)
    if np.max(np.abs(h - h.mean())) > 1e-9 * h.mean():
        raise SchemaError("Numerov integration needs a uniform sample grid", "grid")
    return float(h.mean())


@njit(cache=True)
def _numerov_kernel(Q, h, u1):
    n = len(Q)
    u = np.empty(n)
    u[0] = 0.0
    u[1] = u1
    f = h * h / 12.0
    for i in range(1, n - 1):
        u[i + 1] = (2.0 * u[i] * (1.0 - 5.0 * f * Q[i]) - u[i - 1] * (1.0 + f * Q[i - 1])) / (1.0 + f * Q[i + 1])
    return u


def numerov_solution(profile: SampledProfile, lam: float, mu: float) -> np.ndarray:
    """u on the sample grid with u(0) = 0, u'(0) = 1 (Numerov scheme)."""
    h = _require_uniform(profile)
    Q, dQ, ddQ = _q_and_derivs(profile, lam, mu)
    u1 = h - Q[0] * h ** 3 / 6 - dQ[0] * h ** 4 / 12 + (Q[0] ** 2 - 3 * ddQ[0]) * h ** 5 / 120
    return _numerov_kernel(np.ascontiguousarray(Q), h, u1)


def integrate_solution(profile, lam: float, mu: float, y_eval, rtol: float = 1e-12,
                       atol: float = 1e-14) -> Tuple[np.ndarray, np.ndarray]:
    """u and u' at ``y_eval`` from u(0) = 0, u'(0) = 1 by an 8th-order Runge-Kutta method."""
    sp = _as_sampled(profile)
    y_eval = np.asarray(y_eval, dtype=float)
    c_m, c_M = extremes(sp)
    qmax = max(abs(lam / c_m - mu * mu), abs(lam / c_M - mu * mu), 1e-300)
    max_step = 0.1 * 2 * math.pi / math.sqrt(qmax)
    mu2 = mu * mu

    def f(y, z):
        return [z[1], -(lam / float(sp(y)) - mu2) * z[0]]

    if sp.interpolation == "piecewise-linear":
        sol = solve_ivp(f, (0.0, sp.H), [0.0, 1.0], method="DOP853", t_eval=y_eval, rtol=rtol,
                        atol=atol, max_step=max_step)
        if not sol.success:
            raise StepFailure(sol.message)
        return sol.y[0], sol.y[1]
    # left-constant: constant q on each cell, so propagate in closed form
    u = np.empty_like(y_eval)
    du = np.empty_like(y_eval)
    g = sp.grid
    cell = np.clip(np.searchsorted(g, y_eval, side="right") - 1, 0, len(g) - 2)
    order = np.argsort(y_eval, kind="stable")
    z0, z1, ic = 0.0, 1.0, 0
    for i in order:
        while ic < cell[i]:
            q = lam / sp.samples[ic] - mu2
            z0, z1 = _exact_step(z0, z1, q, g[ic + 1] - g[ic])
            ic += 1
        q = lam / sp.samples[ic] - mu2
        u[i], du[i] = _exact_step(z0, z1, q, y_eval[i] - g[ic])
    return u, du


def _exact_step(u, du, q, t):
    if abs(q) * t * t < 1e-6:
        c, s = _series(q, t)
    elif q > 0:
        w = math.sqrt(q)
        c, s = math.cos(w * t), math.sin(w * t) / w
    else:
        w = math.sqrt(-q)
        c, s = math.cosh(w * t), math.sinh(w * t) / w
    return u * c + du * s, du * c - u * q * s


def _series(q, t):
    z = q * t * t
    return 1 - z / 2 + z * z / 24 - z ** 3 / 720, t * (1 - z / 6 + z * z / 120 - z ** 3 / 5040)


def normalized_solution(profile: SampledProfile, lam: float, mu: float, y=None):
    """Weighted-normalized (u, u') on a grid from the 8th-order integrator."""
    sp = _as_sampled(profile)
    if y is None:
        y = sp.grid
    y = np.asarray(y, dtype=float)
    u, du = integrate_solution(sp, lam, mu, y)
    n2 = trapezoid(u * u / sp(y), y)
    s = 1.0 / math.sqrt(n2)
    return u * s, du * s


# ---------------------------------------------------------------------------
# Liouville frame


@dataclass(frozen=True, eq=False)
class LiouvilleFrame:
    y: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    rho: np.ndarray
    p: np.ndarray
    u: np.ndarray
    du0: float
    lam: float
    mu: float

    @property
    def H_bar(self) -> float:
        return float(self.xi[-1])

    def eta_energy(self) -> float:
        """Integral of eta^2 d xi."""
        return float(trapezoid(self.eta ** 2, self.xi))


def liouville_transform(profile: SampledProfile, lam: float, mu: float, u=None, du0: Optional[float] = None,
                        eps: Optional[float] = None, big_lambda: Optional[float] = None) -> LiouvilleFrame:
    """Build the Liouville frame on the sample grid.

    ``u`` defaults to the Numerov solution of the reduced equation,
    normalized in the c^{-1}-weighted norm by the trapezoid rule.  When
    ``eps`` (and optionally ``big_lambda``) is given, (mu, lam) must lie in
    the corresponding non-guided window.
    """
    if not isinstance(profile, SampledProfile) or not profile.has_derivatives:
        raise MissingDerivatives("the Liouville path needs first and second derivative samples")
    c_m, c_M = extremes(profile)
    t = lam / (mu * mu)
    if eps is not None and t < c_M + eps:
        raise OutsideSpectralWindow(f"lam/mu^2 = {t} < c_M + eps = {c_M + eps}")
    if big_lambda is not None and t > c_M + big_lambda:
        raise OutsideSpectralWindow(f"lam/mu^2 = {t} > c_M + Lambda = {c_M + big_lambda}")
    y = profile.grid
    c, dc, ddc = profile.samples, profile.dsamples, profile.ddsamples
    p = lam / (mu * mu * c) - 1.0
    if np.min(p) <= 0:
        raise OutsideSpectralWindow("p(y) must stay positive (lam > c_M mu^2)")
    dp = -lam * dc / (mu * mu * c ** 2)
    ddp = -lam / (mu * mu) * (ddc / c ** 2 - 2 * dc ** 2 / c ** 3)
    rho = 0.25 * ddp / p ** 2 - (5.0 / 16.0) * dp ** 2 / p ** 3
    xi = cumulative_trapezoid(np.sqrt(p), y, initial=0.0)
    if u is None:
        u = numerov_solution(profile, lam, mu)
        n2 = trapezoid(u * u / c, y)
        u = u / math.sqrt(n2)
        du0 = 1.0 / math.sqrt(n2)
    elif du0 is None:
        raise ValueError("du0 (u'(0)) must accompany a supplied u")
    u = np.asarray(u, dtype=float)
    eta = p ** 0.25 * u
    return LiouvilleFrame(y, xi, eta, rho, p, u, float(du0), float(lam), float(mu))


@dataclass(frozen=True)
class LiouvilleResidual:
    alpha: float
    sup_dev: float
    volterra_bound: float


def liouville_residual(frame: LiouvilleFrame, mu: Optional[float] = None) -> LiouvilleResidual:
    """alpha = eta'(0)/mu and sup |eta - alpha sin(mu xi)| on the grid."""
    if mu is None:
        mu = frame.mu
    # eta' = d(p^{1/4} u)/dxi = p^{-1/4} u' at y = 0 where u = 0
    alpha = frame.p[0] ** -0.25 * frame.du0 / mu
    dev = np.abs(frame.eta - alpha * np.sin(mu * frame.xi))
    bound = frame.H_bar * np.max(np.abs(frame.rho)) * np.max(np.abs(frame.eta)) / mu
    return LiouvilleResidual(float(alpha), float(dev.max()), float(bound))


def liouville_constants(c_m: float, c_M: float, eps: float, big_lambda: float, H: float):
    """kappa_1, kappa_2, zeta_1, zeta_2 and the upper bound on H_bar for the window.

    With int u^2/c = 1 one has int eta^2 dxi = int p c (u^2/c) dy, so the
    energy lies between kappa_1 c_m and kappa_2 c_M.
    """
    k1 = eps / c_M
    k2 = (c_M + big_lambda) / c_m
    return dict(kappa1=k1, kappa2=k2, zeta1=k1 * c_m, zeta2=k2 * c_M,
                H_bar_max=H * math.sqrt((c_M + big_lambda) / c_m - 1.0), H_bar_min=H * math.sqrt(k1))


def alpha_bounds(consts: dict, delta: float, mu_min: float) -> Tuple[float, float]:
    """r_1 <= |alpha| <= r_2 implied by the energy bounds and a deviation bound delta.

    On [0, Hb] the sine energy is Hb/2 +- 1/(4 mu); |eta - alpha sin| <= delta
    changes the L^2 norm by at most delta sqrt(Hb).
    """
    hb_max, hb_min = consts["H_bar_max"], consts["H_bar_min"]
    lo = (math.sqrt(consts["zeta1"]) - delta * math.sqrt(hb_max)) / math.sqrt(hb_max / 2 + 1 / (4 * mu_min))
    den = hb_min / 2 - 1 / (4 * mu_min)
    hi = (math.sqrt(consts["zeta2"]) + delta * math.sqrt(hb_max)) / math.sqrt(den) if den > 0 else math.inf
    return max(lo, 0.0), hi
