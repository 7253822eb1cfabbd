"""Lattice frequency sets on circles (d=2) and spheres (d=3).

All enumeration is exact integer arithmetic; floating point only enters when
spectral summaries are normalised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ArwError, UnsupportedDimension

MAX_N = 2**31
SEPARATION_CONSTANT = 1.0  # implicit constant in min_gap >> n^(1/4 + delta)


@dataclass(frozen=True)
class FrequencySet:
    """The lattice points of squared norm ``n`` in dimension ``dim``.

    ``points`` is an ``(N, dim)`` int64 array in lexicographic order.  ``half``
    holds one representative of every pair ``{lam, -lam}``: the points whose
    last nonzero coordinate is positive.  In dimension 2 this is
    ``{lam_2 > 0}`` plus ``(sqrt(n), 0)`` when ``n`` is a square.
    """

    n: int
    dim: int
    points: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    def __len__(self) -> int:
        return self.count

    @cached_property
    def half_mask(self) -> np.ndarray:
        mask = np.zeros(self.count, dtype=bool)
        decided = np.zeros(self.count, dtype=bool)
        for axis in range(self.dim - 1, -1, -1):
            col = self.points[:, axis]
            mask |= ~decided & (col > 0)
            decided |= col != 0
        return mask

    @property
    def half(self) -> np.ndarray:
        return self.points[self.half_mask]

    @cached_property
    def unit(self) -> np.ndarray:
        """Normalised directions ``lam / sqrt(n)``."""
        return self.points / math.sqrt(self.n)

    @property
    def half_unit(self) -> np.ndarray:
        return self.unit[self.half_mask]


@dataclass(frozen=True)
class SpectralSummary:
    n_count: int
    energy: float
    mu4: float | None
    admissible3d: bool
    min_gap: float


@dataclass(frozen=True)
class FourthMoments:
    """Normalised lattice moment sums.

    ``s2[i, j] = sum(lam_i lam_j) / (n N)`` and
    ``s22[i, j] = sum(lam_i^2 lam_j^2) / (n^2 N)`` (so the diagonal of ``s22``
    holds the pure fourth moments).  ``s4`` is the double sum
    ``sum <lam/|lam|, lam'/|lam'|>^4 / N^2`` over all ordered pairs.
    """

    s4: float
    s2: np.ndarray
    s22: np.ndarray
    tensor: np.ndarray


def enumerate_points(n: int, dim: int) -> FrequencySet:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ArwError(f"n must be a positive integer, got {n!r}")
    if n >= MAX_N:
        raise ArwError(f"n must be below 2**31, got {n}")
    if dim not in (2, 3):
        raise UnsupportedDimension(f"dim must be 2 or 3, got {dim}")
    n = int(n)
    r = math.isqrt(n)
    pts: list[tuple[int, ...]] = []
    if dim == 2:
        for a in range(-r, r + 1):
            rest = n - a * a
            b = math.isqrt(rest)
            if b * b == rest:
                pts.extend([(a, -b), (a, b)] if b else [(a, 0)])
    else:
        for a in range(-r, r + 1):
            rest_a = n - a * a
            rb = math.isqrt(rest_a)
            for b in range(-rb, rb + 1):
                rest = rest_a - b * b
                c = math.isqrt(rest)
                if c * c == rest:
                    pts.extend([(a, b, -c), (a, b, c)] if c else [(a, b, 0)])
    pts.sort()
    arr = np.array(pts, dtype=np.int64).reshape(-1, dim)
    return FrequencySet(n=n, dim=dim, points=arr)


def mu4(fs: FrequencySet) -> float:
    """Fourth Fourier coefficient of the spectral measure (dimension 2 only)."""
    if fs.dim != 2:
        raise UnsupportedDimension("mu4 is only defined for dim 2")
    if fs.count == 0:
        raise ArwError("mu4 of an empty frequency set")
    x = fs.points[:, 0].astype(object)
    y = fs.points[:, 1].astype(object)
    # integer-only: Re(z^4) n^2 and Im(z^4) n^2
    re = int(np.sum(x**4 - 6 * x**2 * y**2 + y**4))
    im = int(np.sum(4 * x**3 * y - 4 * x * y**3))
    denom = fs.n * fs.n * fs.count
    if abs(im) / denom >= 1e-12:
        raise ArwError(f"mu4 has nonzero imaginary part {im / denom}")
    return re / denom


def min_gap(fs: FrequencySet) -> float:
    p = fs.points.astype(np.float64)
    if fs.count < 2:
        return math.inf
    d2 = ((p[:, None, :] - p[None, :, :]) ** 2).sum(-1)
    np.fill_diagonal(d2, np.inf)
    return float(math.sqrt(d2.min()))


def admissible3d(n: int) -> bool:
    return n % 8 not in (0, 4, 7)


def summarize(fs: FrequencySet) -> SpectralSummary:
    if fs.count == 0:
        raise ArwError(f"no lattice points with squared norm {fs.n} in dim {fs.dim}")
    return SpectralSummary(
        n_count=fs.count,
        energy=4 * math.pi**2 * fs.n,
        mu4=mu4(fs) if fs.dim == 2 else None,
        admissible3d=admissible3d(fs.n) if fs.dim == 3 else False,
        min_gap=min_gap(fs),
    )


def is_delta_separated(fs: FrequencySet, delta: float) -> bool:
    return min_gap(fs) >= SEPARATION_CONSTANT * fs.n ** (0.25 + delta)


def direction_tensor(units: np.ndarray, order: int) -> np.ndarray:
    """Mean of the ``order``-fold outer product of the rows of ``units``."""
    m, d = units.shape
    res = np.ones(m)
    for k in range(order):
        res = res[..., None] * units.reshape((m,) + (1,) * k + (d,))
    return res.mean(axis=0)


def fourth_moment_sums(fs: FrequencySet) -> FourthMoments:
    if fs.count == 0:
        raise ArwError("moment sums of an empty frequency set")
    p = fs.points.astype(np.float64)
    n, N = fs.n, fs.count
    s2 = p.T @ p / (n * N)
    sq = p**2
    s22 = sq.T @ sq / (n * n * N)
    tensor = direction_tensor(fs.unit, 4)
    s4 = float(np.sum(tensor**2))
    return FourthMoments(s4=s4, s2=s2, s22=s22, tensor=tensor)
