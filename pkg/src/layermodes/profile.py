"""Diffusion coefficient profiles c(y) on [0, H].

Two representations are supported:

* :class:`LayeredProfile`, a piecewise-constant coefficient given by its
  breakpoints and one value per layer;
* :class:`SampledProfile`, grid samples of a continuous coefficient with a
  piecewise-linear or left-constant interpolation rule, optionally carrying
  first and second derivative samples.

Both are immutable.  The module also provides the geometric descriptors
used by the analysis layer (extremes, total variation, wells) and the
piecewise-constant approximation of sampled profiles.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import SchemaError, ThresholdOutOfRange

INTERPOLATIONS = ("piecewise-linear", "left-constant")


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class LayeredProfile:
    """Piecewise-constant coefficient.

    Parameters
    ----------
    breakpoints : sequence of float
        Strictly increasing, starting at 0 and ending at H.
    values : sequence of float
        One positive value per layer, ``len(breakpoints) - 1`` entries.
    collapse : bool
        Merge adjacent layers with equal values (default).  The merged
        profile describes the same function with fewer interfaces.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints: Sequence[float], values: Sequence[float], collapse: bool = True):
        b = np.asarray(breakpoints, dtype=float)
        v = np.asarray(values, dtype=float)
        if b.ndim != 1 or v.ndim != 1:
            raise SchemaError("breakpoints and values must be one-dimensional")
        if len(b) != len(v) + 1:
            raise SchemaError(
                f"expected {len(v) + 1} breakpoints for {len(v)} values, got {len(b)}", "breakpoints")
        if len(v) == 0:
            raise SchemaError("at least one layer is required", "values")
        if b[0] != 0.0:
            raise SchemaError("first breakpoint must be 0", "breakpoints/0")
        for i in range(len(b) - 1):
            if not b[i + 1] > b[i]:
                raise SchemaError("breakpoints must be strictly increasing", f"breakpoints/{i + 1}")
        for i, c in enumerate(v):
            if not (np.isfinite(c) and c > 0):
                raise SchemaError(f"value must be positive and finite, got {c}", f"values/{i}")
        if collapse and len(v) > 1:
            keep = np.concatenate(([True], v[1:] != v[:-1]))
            v = v[keep]
            b = np.concatenate((b[:-1][keep], b[-1:]))
        object.__setattr__(self, "breakpoints", _readonly(b))
        object.__setattr__(self, "values", _readonly(v))

    def __setattr__(self, name, value):
        raise AttributeError("LayeredProfile is immutable")

    def __reduce__(self):
        return (LayeredProfile, (self.breakpoints, self.values, False))

    def __repr__(self):
        return f"LayeredProfile(breakpoints={self.breakpoints.tolist()}, values={self.values.tolist()})"

    def __eq__(self, other):
        return (isinstance(other, LayeredProfile)
                and np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.breakpoints.tobytes(), self.values.tobytes()))

    @property
    def H(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def n_layers(self) -> int:
        return len(self.values)

    @property
    def interfaces(self) -> np.ndarray:
        """Interior breakpoints."""
        return self.breakpoints[1:-1]

    @property
    def thicknesses(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def layer_index(self, y):
        """Index of the layer containing ``y`` (the upper layer at an interface)."""
        idx = np.searchsorted(self.breakpoints, y, side="right") - 1
        return np.clip(idx, 0, self.n_layers - 1)

    def __call__(self, y):
        return self.values[self.layer_index(y)]

    def scaled(self, s: float) -> "LayeredProfile":
        return LayeredProfile(self.breakpoints, s * self.values)

    @classmethod
    def constant(cls, c0: float, H: float) -> "LayeredProfile":
        return cls([0.0, H], [c0])

    @classmethod
    def uniform(cls, values: Sequence[float], H: float = 1.0, collapse: bool = True) -> "LayeredProfile":
        """Layers of equal thickness."""
        n = len(values)
        return cls(np.linspace(0.0, H, n + 1), values, collapse=collapse)


class SampledProfile:
    """Grid samples of a continuous coefficient.

    Parameters
    ----------
    grid : sequence of float
        Strictly increasing, ``grid[0] == 0`` and ``grid[-1] == H``.
    samples : sequence of float
        Positive values c(y_i).
    interpolation : {"piecewise-linear", "left-constant"}
        Left-constant means c(y) = samples[i] on [y_i, y_{i+1}); the last
        sample is then only used at y = H.
    dsamples, ddsamples : sequence of float, optional
        c'(y_i) and c''(y_i).  Needed by the Liouville and Lipschitz paths.
    """

    __slots__ = ("grid", "samples", "interpolation", "dsamples", "ddsamples")

    def __init__(self, grid, samples, interpolation: str = "piecewise-linear",
                 dsamples=None, ddsamples=None):
        g = np.asarray(grid, dtype=float)
        s = np.asarray(samples, dtype=float)
        if g.ndim != 1 or s.ndim != 1 or len(g) != len(s):
            raise SchemaError("grid and samples must be one-dimensional of equal length", "samples")
        if len(g) < 2:
            raise SchemaError("at least two grid points are required", "grid")
        if g[0] != 0.0:
            raise SchemaError("grid must start at 0", "grid/0")
        bad = np.nonzero(~(np.diff(g) > 0))[0]
        if len(bad):
            raise SchemaError("grid must be strictly increasing", f"grid/{bad[0] + 1}")
        bad = np.nonzero(~(np.isfinite(s) & (s > 0)))[0]
        if len(bad):
            raise SchemaError(f"sample must be positive and finite, got {s[bad[0]]}", f"samples/{bad[0]}")
        if interpolation == "linear":
            interpolation = "piecewise-linear"
        if interpolation not in INTERPOLATIONS:
            raise SchemaError(f"unknown interpolation {interpolation!r}", "interpolation")
        derivs = []
        for name, d in (("dsamples", dsamples), ("ddsamples", ddsamples)):
            if d is not None:
                d = np.asarray(d, dtype=float)
                if d.shape != g.shape:
                    raise SchemaError(f"expected {len(g)} entries, got {d.size}", name)
                if not np.all(np.isfinite(d)):
                    raise SchemaError("derivative samples must be finite", name)
                d = _readonly(d)
            derivs.append(d)
        object.__setattr__(self, "grid", _readonly(g))
        object.__setattr__(self, "samples", _readonly(s))
        object.__setattr__(self, "interpolation", interpolation)
        object.__setattr__(self, "dsamples", derivs[0])
        object.__setattr__(self, "ddsamples", derivs[1])

    def __setattr__(self, name, value):
        raise AttributeError("SampledProfile is immutable")

    def __reduce__(self):
        return (SampledProfile, (self.grid, self.samples, self.interpolation, self.dsamples, self.ddsamples))

    def __repr__(self):
        return (f"SampledProfile(M={len(self.grid) - 1}, H={self.H}, "
                f"interpolation={self.interpolation!r}, derivatives={self.has_derivatives})")

    @property
    def H(self) -> float:
        return float(self.grid[-1])

    @property
    def has_derivatives(self) -> bool:
        return self.dsamples is not None and self.ddsamples is not None

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.interpolation == "piecewise-linear":
            return np.interp(y, self.grid, self.samples)
        idx = np.clip(np.searchsorted(self.grid, y, side="right") - 1, 0, len(self.grid) - 1)
        return self.samples[idx]

    def scaled(self, s: float) -> "SampledProfile":
        d = None if self.dsamples is None else s * self.dsamples
        dd = None if self.ddsamples is None else s * self.ddsamples
        return SampledProfile(self.grid, s * self.samples, self.interpolation, d, dd)

    @classmethod
    def from_function(cls, f: Callable, H: float, M: int, df: Optional[Callable] = None,
                      ddf: Optional[Callable] = None, interpolation: str = "piecewise-linear"):
        """Sample ``f`` (and optionally its derivatives) on M equal cells."""
        y = np.linspace(0.0, H, M + 1)
        ev = lambda g: None if g is None else np.broadcast_to(np.asarray(g(y), dtype=float), y.shape)
        return cls(y, ev(f), interpolation, ev(df), ev(ddf))

    @classmethod
    def from_layered(cls, profile: LayeredProfile) -> "SampledProfile":
        """Exact left-constant representation of a layered profile."""
        v = profile.values
        return cls(profile.breakpoints, np.concatenate((v, v[-1:])), "left-constant")


Profile = Union[LayeredProfile, SampledProfile]


@dataclass(frozen=True)
class WellDescriptor:
    """Interval (alpha, beta) outside of which c >= c1.

    ``enlarged`` is true when the sublevel set {c < c1} is disconnected and
    the interval was widened to enclose every component; ``components``
    lists the individual pieces.
    """

    alpha: float
    beta: float
    c1: float
    floor: float
    enlarged: bool = False
    components: Tuple[Tuple[float, float], ...] = ()

    @property
    def valid(self) -> bool:
        # By construction c >= c1 outside the enclosing interval.
        return self.floor < self.c1


def extremes(profile: Profile) -> Tuple[float, float]:
    """Return (c_m, c_M), the minimum and maximum of the coefficient."""
    v = profile.values if isinstance(profile, LayeredProfile) else _effective_samples(profile)
    return float(v.min()), float(v.max())


def _effective_samples(profile: SampledProfile) -> np.ndarray:
    if profile.interpolation == "left-constant":
        # The last sample is only attained at the single point y = H.
        return profile.samples[:-1]
    return profile.samples


def total_variation(profile: Profile) -> float:
    """Total variation of c on [0, H]."""
    if isinstance(profile, LayeredProfile):
        return float(np.abs(np.diff(profile.values)).sum())
    return float(np.abs(np.diff(_effective_samples(profile))).sum())


def _sublevel_components(profile: Profile, c1: float):
    """Intervals where c < c1, merged when they touch."""
    pieces = []
    if isinstance(profile, LayeredProfile) or profile.interpolation == "left-constant":
        if isinstance(profile, LayeredProfile):
            b, v = profile.breakpoints, profile.values
        else:
            b, v = profile.grid, profile.samples[:-1]
        for j in np.nonzero(v < c1)[0]:
            pieces.append((float(b[j]), float(b[j + 1])))
    else:
        g, s = profile.grid, profile.samples
        for i in range(len(g) - 1):
            y0, y1, s0, s1 = g[i], g[i + 1], s[i], s[i + 1]
            if s0 >= c1 and s1 >= c1:
                continue
            if s0 < c1 and s1 < c1:
                pieces.append((float(y0), float(y1)))
                continue
            # exactly one crossing of the linear piece
            yc = y0 + (c1 - s0) * (y1 - y0) / (s1 - s0)
            pieces.append((float(y0), float(yc)) if s0 < c1 else (float(yc), float(y1)))
    merged = []
    for a, b in pieces:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def find_well(profile: Profile, c1: float) -> Optional[WellDescriptor]:
    """Smallest interval containing the sublevel set {c < c1}.

    Raises
    ------
    ThresholdOutOfRange
        If ``c1 <= c_m`` or ``c1 > c_M``.
    """
    c_m, c_M = extremes(profile)
    if not (c_m < c1 <= c_M):
        raise ThresholdOutOfRange(f"c1={c1} must satisfy c_m={c_m} < c1 <= c_M={c_M}")
    comps = _sublevel_components(profile, c1)
    if not comps:
        return None
    alpha, beta = comps[0][0], comps[-1][1]
    return WellDescriptor(alpha, beta, float(c1), _inf_on(profile, alpha, beta),
                          enlarged=len(comps) > 1, components=tuple(comps))


def _inf_on(profile: Profile, a: float, b: float) -> float:
    if isinstance(profile, LayeredProfile):
        j0 = int(profile.layer_index(a))
        j1 = int(np.searchsorted(profile.breakpoints, b, side="left")) - 1
        return float(profile.values[j0:j1 + 1].min())
    inner = (profile.grid > a) & (profile.grid < b)
    vals = list(profile(np.array([a, b])))
    if profile.interpolation == "left-constant":
        inner = inner & (np.arange(len(profile.grid)) < len(profile.grid) - 1)
    vals.extend(profile.samples[inner])
    return float(min(vals))


def pc_approximate(profile: SampledProfile, n: int, rule: str = "left") -> LayeredProfile:
    """Piecewise-constant approximation on n equal cells.

    Each cell takes the interpolant value at its left endpoint
    (``rule="left"``) or at its midpoint (``rule="midpoint"``).  Any point
    sampling keeps the range of the profile and cannot increase its total
    variation.  The midpoint rule has second-order eigenvalue error for
    smooth profiles, the left rule only first order.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    H = profile.H
    edges = np.linspace(0.0, H, n + 1)
    if rule == "left":
        pts = edges[:-1]
    elif rule == "midpoint":
        pts = 0.5 * (edges[:-1] + edges[1:])
    else:
        raise ValueError(f"unknown sampling rule {rule!r}")
    return LayeredProfile(edges, profile(pts))


def sup_distance(profile: SampledProfile, approx: LayeredProfile) -> float:
    """Sup-norm distance between a sampled profile and a layered one.

    Both functions are piecewise linear between the union of their
    breakpoints, so the supremum is attained at those points (taking one-
    sided limits at the layered jumps).
    """
    pts = np.union1d(profile.grid, approx.breakpoints)
    c = profile(pts)
    eps = 1e-12 * profile.H
    left = np.abs(c - approx(np.clip(pts - eps, 0.0, None)))
    right = np.abs(c - approx(pts))
    if profile.interpolation == "left-constant":
        # left-constant pieces also jump; compare left limits of both
        cl = profile(np.clip(pts - eps, 0.0, None))
        left = np.maximum(left, np.abs(cl - approx(np.clip(pts - eps, 0.0, None))))
    return float(max(left.max(), right.max()))
