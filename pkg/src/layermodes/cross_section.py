"""Dirichlet Laplacian eigenpairs of interval and box cross-sections.

For a box with sides L_1, ..., L_d the eigenfunctions are products of
sines and the eigenvalues are mu^2 = sum_i (n_i pi / L_i)^2, so every
quantity here has a closed form.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import SchemaError, SubboxOutOfBounds


@dataclass(frozen=True)
class CrossSection:
    lengths: Tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        if len(lengths) == 0:
            raise SchemaError("cross-section needs at least one side length", "lengths")
        for i, L in enumerate(lengths):
            if not (math.isfinite(L) and L > 0):
                raise SchemaError(f"side length must be positive, got {L}", f"lengths/{i}")
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def interval(cls, L: float) -> "CrossSection":
        return cls((L,))

    @classmethod
    def box(cls, lengths: Sequence[float]) -> "CrossSection":
        return cls(tuple(lengths))

    @property
    def dimension(self) -> int:
        return len(self.lengths)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))


@dataclass(frozen=True)
class TransverseMode:
    """One Dirichlet eigenpair of the cross-section, with flat index k (1-based)."""

    k: int
    multi_index: Tuple[int, ...]
    mu2: float

    @property
    def mu(self) -> float:
        return math.sqrt(self.mu2)


def _mu2(cs: CrossSection, n: Sequence[int]) -> float:
    return float(sum((ni * math.pi / L) ** 2 for ni, L in zip(n, cs.lengths)))


def mu_values(cs: CrossSection, k_max: int) -> List[TransverseMode]:
    """First ``k_max`` transverse modes, sorted by mu^2 then by multi-index."""
    if int(k_max) != k_max or k_max < 1:
        raise ValueError("k_max must be a positive integer")
    k_max = int(k_max)
    if cs.dimension == 1:
        L = cs.lengths[0]
        return [TransverseMode(n, (n,), (n * math.pi / L) ** 2) for n in range(1, k_max + 1)]

    # Enumerate all multi-indices below a bound; once at least k_max lie
    # below it, the k_max smallest are exactly the first k_max modes.
    bound = _mu2(cs, (1,) * cs.dimension) * 4.0
    while True:
        ranges = [range(1, int(math.floor(L * math.sqrt(bound) / math.pi)) + 1) for L in cs.lengths]
        cand = []
        for n in itertools.product(*ranges):
            m2 = _mu2(cs, n)
            if m2 <= bound:
                cand.append((m2, n))
        if len(cand) >= k_max:
            break
        bound *= 2.0
    # Round mu^2 to absorb last-bit differences so that equal sums tie exactly.
    cand.sort(key=lambda t: (round(t[0], 9), t[1]))
    return [TransverseMode(i + 1, n, m2) for i, (m2, n) in enumerate(cand[:k_max])]


def mode_at(cs: CrossSection, k: int) -> TransverseMode:
    return mu_values(cs, k)[-1]


def _sin2_integral(n: int, L: float, a: float, b: float) -> float:
    w = n * math.pi / L
    return 0.5 * (b - a) - (math.sin(2 * w * b) - math.sin(2 * w * a)) / (4 * w)


def phi_mass_ratio(cs: CrossSection, mode: TransverseMode, subbox) -> float:
    """Fraction of the mass of phi_k carried by a sub-box.

    ``subbox`` is one (a_i, b_i) pair per axis.  The result is the product
    over axes of the sine-squared integral over (a_i, b_i) divided by L_i/2.
    """
    subbox = [tuple(map(float, ab)) for ab in subbox]
    if len(subbox) != cs.dimension:
        raise SubboxOutOfBounds(f"expected {cs.dimension} intervals, got {len(subbox)}")
    ratio = 1.0
    for (a, b), n, L in zip(subbox, mode.multi_index, cs.lengths):
        if not (0.0 <= a <= b <= L):
            raise SubboxOutOfBounds(f"interval ({a}, {b}) is not inside (0, {L})")
        ratio *= _sin2_integral(n, L, a, b) / (0.5 * L)
    return float(min(max(ratio, 0.0), 1.0))


def equidistribution_threshold(cs: CrossSection, subbox, fraction: float = 0.5) -> Tuple[int, ...]:
    """Per-axis index above which the mass ratio exceeds a fraction of the volume ratio.

    On one axis the sine-squared average over (a, b) differs from (b-a)/L by
    at most 1/(n pi).  Requiring that error to stay below (1 - f) (b-a)/L
    with f = fraction**(1/d) gives n >= 1 / (pi (1 - f) (b-a)/L); if every
    index n_i clears its threshold the product is at least
    ``fraction * |subbox| / |cross-section|``.
    """
    if not (0 < fraction < 1):
        raise ValueError("fraction must lie in (0, 1)")
    f = fraction ** (1.0 / cs.dimension)
    out = []
    for (a, b), L in zip(subbox, cs.lengths):
        r = (b - a) / L
        if r <= 0:
            raise SubboxOutOfBounds("sub-box must have positive width on every axis")
        out.append(int(math.ceil(1.0 / (math.pi * (1.0 - f) * r))))
    return tuple(out)
