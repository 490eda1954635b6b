"""Acceptance criteria, one test each, at their stated tolerances.

Every test prints a single ``CRITERION n: PASS|FAIL`` line with the
measured quantities before asserting.
"""
import io
import math
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

from layermodes import analysis as an
from layermodes import cli
from layermodes import general_solver as gs
from layermodes.cross_section import CrossSection, mu_values
from layermodes.io import load_profile
from layermodes.layer_solver import (build_eigenfunction, eigenvalue_by_index, eigenvalues_in_window, evaluate,
                                     zero_count)
from layermodes.profile import LayeredProfile, SampledProfile, extremes

PROFILES = Path(__file__).resolve().parent.parent / "profiles"


def _verdict(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


# ---------------------------------------------------------------------------
# shared sweep for criteria 4, 5 and 6


def _random_profile(rng, tv_max=3.0):
    n = int(rng.integers(2, 7))
    b = np.concatenate(([0.0], np.sort(rng.uniform(0.0, 1.0, n - 1)), [1.0]))
    v = rng.uniform(1.0, 2.5, n)
    tv = float(np.abs(np.diff(v)).sum())
    if tv > tv_max:
        v = 1.0 + (v - 1.0) * tv_max / tv * 0.999
    return LayeredProfile(b, v)


FLOOR_L = 0.1            # cross-section length; mu_1 = 10 pi
FLOOR_TOP = 1e4          # lambda up to FLOOR_TOP * mu_1^2
BANDS = [(i / 10, (i + 1) / 10) for i in range(10)]


def _floor_profiles():
    rng = np.random.default_rng(12345)
    profs = [_random_profile(rng) for _ in range(20)]
    profs.append(LayeredProfile([0, 1 / 3, 2 / 3, 1], [1.0, 2.0, 4.0]))
    return profs


@pytest.fixture(scope="module")
def floor_sweep():
    """NonGuided modes above the tenth-band threshold, 8 log-spaced indices per k."""
    cs = CrossSection.interval(FLOOR_L)
    mu1 = mu_values(cs, 1)[0].mu
    top = FLOOR_TOP * mu1 ** 2
    out = []
    for P in _floor_profiles():
        c_m, c_M = extremes(P)
        eps = an.default_eps(P)
        modes, r2, zsets = [], [], []
        k = 1
        while True:
            mu = k * mu1
            lo = max((c_M + eps) * mu * mu, an.lambda0_band(mu, c_M, 0.1))
            if lo >= top:
                break
            l0, l1 = zero_count(lo, mu, P) + 1, zero_count(top, mu, P)
            if l1 >= l0:
                for ell in np.unique(np.round(np.geomspace(l0, l1, 8)).astype(int)):
                    ef = build_eigenfunction(eigenvalue_by_index(mu, int(ell), P, k=k), P)
                    zs = an.zeros(ef, eps)
                    modes.append(ef)
                    zsets.append(zs)
                    r2.append(an.min_amplitude(ef, zero_set=zs).r2)
            k += 1
        out.append(dict(profile=P, eps=eps, modes=modes, r2=r2, zeros=zsets, mu1=mu1))
    return out


# ---------------------------------------------------------------------------


def test_criterion_01_constant_profile_exactness(capsys):
    c0 = 1.7
    P = LayeredProfile.constant(c0, math.pi)
    y = np.linspace(0.0, math.pi, 257)
    t0 = time.perf_counter()
    worst_lam, worst_u, count = 0.0, 0.0, 0
    for k in range(1, 21):
        pairs = eigenvalues_in_window(k, c0 * k * k, c0 * (k * k + 20.5 ** 2), P, k=k)
        assert [p.ell for p in pairs] == list(range(1, 21))
        for p in pairs:
            exact = c0 * (k * k + p.ell ** 2)
            worst_lam = max(worst_lam, abs(p.lam - exact) / exact)
            u, du = evaluate(build_eigenfunction(p, P), y)
            ref = math.sqrt(2 * c0 / math.pi) * np.sin(p.ell * y)
            worst_u = max(worst_u, float(np.max(np.abs(np.sign(du[0]) * u - ref))))
            count += 1
    elapsed = time.perf_counter() - t0
    ok = count == 400 and worst_lam < 1e-10 and worst_u < 1e-9 and elapsed < 1.0
    _verdict(capsys, 1, ok, f"pairs={count} max rel eig err={worst_lam:.2e} max sup err={worst_u:.2e} "
                            f"time={elapsed:.3f}s")


def _thirty_window(P, mu):
    c_m, c_M = extremes(P)
    lo = 0.5 * c_m * mu * mu
    if isinstance(P, LayeredProfile):
        l30, l31 = eigenvalue_by_index(mu, 30, P).lam, eigenvalue_by_index(mu, 31, P).lam
        hi = 0.5 * (l30 + l31)
        return lo, hi, eigenvalues_in_window(mu, lo, hi, P)
    pairs = gs.eigenvalues_pruefer(mu, lo, c_M * (mu * mu + (32 * math.pi / P.H) ** 2), P)
    hi = 0.5 * (pairs[29].lam + pairs[30].lam)
    return lo, hi, gs.eigenvalues_pruefer(mu, lo, hi, P)


def test_criterion_02_oracle_equivalence(capsys):
    ten = [1.0, 2.5, 1.5, 3.0, 1.2, 2.2, 4.0, 1.8, 2.7, 1.1]
    cases = {
        "2-layer": (LayeredProfile([0, 0.5, 1], [1.0, 4.0]), 4096),
        "3-layer": (LayeredProfile([0, 1 / 3, 2 / 3, 1], [1.0, 1.2, 4.0]), 3072),
        "10-layer": (LayeredProfile.uniform(ten), 4000),
        "linear": (SampledProfile.from_function(lambda y: 1 + y, 1.0, 1024, df=lambda y: 1 + 0 * y), 4096),
        "quadratic": (SampledProfile.from_function(lambda y: 1 + y * y, 1.0, 1024, df=lambda y: 2 * y,
                                                   ddf=lambda y: 2 + 0 * y), 4096),
    }
    mu = 5.0
    t0 = time.perf_counter()
    ok, notes = True, []
    for name, (P, n) in cases.items():
        lo, hi, pairs = _thirty_window(P, mu)
        fd = gs.fd_oracle(mu, P, lo, hi, grid_n=n)
        counts_ok = len(pairs) == len(fd) == 30 and gs.fd_count(mu, P, hi, n) - gs.fd_count(mu, P, lo, n) == 30
        idx_ok = [p.ell for p in pairs] == [f.index for f in fd]
        ratio = max(abs(p.lam - f.lam) / f.error for p, f in zip(pairs, fd))
        ok &= counts_ok and idx_ok and ratio <= 1.0
        notes.append(f"{name}:{ratio:.3f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    _verdict(capsys, 2, ok, "max |lam - lam_fd| / band " + " ".join(notes) + f" time={elapsed:.1f}s")


def test_criterion_03_guided_decay(capsys):
    out = io.StringIO()
    code = cli.run(["decay", "--profile", str(PROFILES / "two_layer_well.yaml"), "--k", "5..80",
                    "--band", "0.7..0.9", "--jobs", "4"], out=out)
    rep = yaml.safe_load(out.getvalue())
    slope = rep["summary"]["slope_log_lhs_vs_xi_d"]
    n_modes = len(rep["rows"])
    ks = {r[0] for r in rep["rows"]}
    ok = code == 0 and rep["holds"] and ks == set(range(5, 81)) and slope <= -0.95
    _verdict(capsys, 3, ok, f"exit={code} guided modes={n_modes} violations={len(rep['violations'])} "
                            f"slope={slope:.3f}")


def test_criterion_04_nonguided_floor(capsys, floor_sweep):
    worst_ratio, n_modes, n_bands_bad = math.inf, 0, 0
    for entry in floor_sweep:
        for band in BANDS:
            rep = an.nonconcentration_floor(entry["modes"], band, entry["eps"], r2_values=entry["r2"])
            worst_ratio = min(worst_ratio, float(np.min(rep.masses / rep.floors)))
            n_bands_bad += not rep.holds
        n_modes += len(entry["modes"])
    # trend: every NonGuided mode of the first transverse mode up to the top of the sweep
    slopes = []
    for entry in floor_sweep:
        P, eps, mu = entry["profile"], entry["eps"], entry["mu1"]
        c_M = extremes(P)[1]
        lo, hi = (c_M + eps) * mu * mu, FLOOR_TOP * mu * mu
        lams, r2 = [], []
        for p in eigenvalues_in_window(mu, lo, hi, P, k=1, with_residual=False):
            lams.append(p.lam)
            r2.append(an.min_amplitude(build_eigenfunction(p, P)).r2)
        slopes.append(an.regression_slope(np.log(lams), np.log(r2)))
    max_slope = float(np.max(np.abs(slopes)))
    ok = n_bands_bad == 0 and max_slope <= 0.02
    _verdict(capsys, 4, ok, f"profiles={len(floor_sweep)} modes={n_modes} bad bands={n_bands_bad} "
                            f"min mass/floor={worst_ratio:.3f} max |slope log r2 vs log lam|={max_slope:.4f}")


def test_criterion_05_zero_gaps(capsys, floor_sweep):
    n, bad, worst = 0, 0, 0.0
    for entry in floor_sweep:
        for zs in entry["zeros"]:
            assert zs.tag == an.NONGUIDED
            n += 1
            bad += not zs.holds
            worst = max(worst, zs.max_gap / zs.gap_bound)
    _verdict(capsys, 5, bad == 0, f"modes={n} violations={bad} max gap/bound={worst:.3f}")


def test_criterion_06_transmission_algebra(capsys, floor_sweep):
    n, worst, cum_bad = 0, 0.0, 0
    for entry in floor_sweep:
        for ef in entry["modes"]:
            if ef.profile.n_layers < 2:
                continue
            r = an.amplitude_ratios(ef, entry["eps"])
            worst = max(worst, r.max_residual)
            cum_bad += not r.cumulative_holds
            n += 1
    ok = n > 0 and worst < 1e-9 and cum_bad == 0
    _verdict(capsys, 6, ok, f"modes={n} max identity residual={worst:.2e} cumulative violations={cum_bad}")


def test_criterion_07_liouville_asymptotics(capsys):
    P = SampledProfile.from_function(lambda y: 1 + y * y, 1.0, 4096, df=lambda y: 2 * y, ddf=lambda y: 2 + 0 * y)
    c_m, c_M = extremes(P)
    eps, big = 0.5, c_M
    mus = [20, 40, 80, 160]
    dev, alpha = {}, []
    for mu in mus:
        d = {}
        for p in gs.eigenvalues_pruefer(mu, (c_M + eps) * mu ** 2, (c_M + big) * mu ** 2, P):
            res = gs.liouville_residual(gs.liouville_transform(P, p.lam, mu, eps=eps, big_lambda=big))
            d[p.ell] = res.sup_dev
            alpha.append(abs(res.alpha))
        dev[mu] = d
    # mode l at mu and mode 2l at 2 mu sit at the same spectral ratio lam / mu^2
    ratios = []
    for mu, mu2 in zip(mus, mus[1:]):
        common = [l for l in dev[mu] if 2 * l in dev[mu2]]
        ratios.append(max(dev[mu2][2 * l] for l in common) / max(dev[mu][l] for l in common))
    delta = max(max(d.values()) for d in dev.values())
    r1, r2 = gs.alpha_bounds(gs.liouville_constants(c_m, c_M, eps, big, P.H), delta, min(mus))
    ok = all(0.4 <= r <= 0.6 for r in ratios) and r1 <= min(alpha) and max(alpha) <= r2
    _verdict(capsys, 7, ok, "halving ratios=" + ",".join(f"{r:.3f}" for r in ratios)
             + f" alpha in [{min(alpha):.3f},{max(alpha):.3f}] within [r1,r2]=[{r1:.3f},{r2:.3f}]")


def test_criterion_08_existence(capsys):
    doc = load_profile(PROFILES / "three_layer.yaml")
    P, cs = doc.profile, doc.cross_section
    eps = 0.05
    cond = an.existence_condition(1.0, 1.2, 4.0, 0.1, 0.6, 1.0, eps)
    k0 = next(m.k for m in mu_values(cs, 60) if m.mu >= cond.mu_threshold)
    rep = an.existence_verify(P, eps, range(k0, 61), cs)
    counts = [v.count for v in rep.verdicts]
    nonempty = all(c > 0 for c in counts)
    linear = all(v.count >= v.lower_bound for v in rep.verdicts) and rep.count_slope > 0
    lb_slope = cond.a_n + cond.a_N - cond.a_A
    ok = (cond.holds and abs(cond.lhs - 0.2928) < 1e-4 and abs(cond.rhs - 0.5556) < 1e-4 and nonempty
          and linear and rep.holds)
    _verdict(capsys, 8, ok, f"lhs={cond.lhs:.4f} rhs={cond.rhs:.4f} threshold k={k0} counts {counts[0]}..{counts[-1]} "
                            f"slope={rep.count_slope:.3f}/mu (guaranteed {lb_slope:.3f}/mu)")


def test_criterion_09_bv_convergence(capsys):
    doc = load_profile(PROFILES / "linear.yaml")
    P = doc.profile
    mu = mu_values(doc.cross_section, 3)[-1].mu
    c_M = extremes(P)[1]
    eps = an.default_eps(P)
    target = gs.eigenvalues_pruefer(mu, (c_M + eps) * mu * mu, 3 * (c_M + eps) * mu * mu, P)[0]
    rep = an.bv_convergence(P, target.lam, mu, [8, 16, 32, 64, 128, 256, 512])
    ok = rep.lam_decreasing and rep.u_decreasing and rep.final_ok and bool(rep.index_match.all())
    _verdict(capsys, 9, ok, f"lam={rep.lam:.6f} l={rep.ell} errors " + ",".join(f"{e:.1e}" for e in rep.lam_errors)
             + f" final/lam={rep.lam_errors[-1] / rep.lam:.1e}")


def test_criterion_10_monotone_structure(capsys):
    P = LayeredProfile([0, 0.5, 1.0], [1.0, 4.0])
    eps = an.default_eps(P)
    n, peaks_bad, ratio_bad, worst = 0, 0, 0, 0.0
    for k in range(1, 21):
        mu = float(k)
        for p in eigenvalues_in_window(mu, (4.0 + eps) * mu * mu, 16.0 * mu * mu, P, k=k):
            r = an.monotone_checks(build_eigenfunction(p, P), eps)
            n += 1
            peaks_bad += not r.peaks_nondecreasing
            ratio_bad += r.peak_ratio > r.frak_c * (1 + 1e-9)
            worst = max(worst, r.peak_ratio / r.frak_c)
    ok = n > 0 and peaks_bad == 0 and ratio_bad == 0
    _verdict(capsys, 10, ok, f"modes={n} peak order violations={peaks_bad} ratio violations={ratio_bad} "
                             f"max peak ratio/c={worst:.3f}")
