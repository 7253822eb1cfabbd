"""Level-set geometry: marching squares, curve crossings, marching cubes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage.measure import marching_cubes, mesh_surface_area

from .errors import ResolutionTooCoarse, SamplingTooCoarse, UnsupportedDimension

TANGENTIAL_TOL = 1e-8
BISECT_TOL = 1e-12
TOUCH_TOL = 1e-12


@dataclass(frozen=True)
class LevelMeasurement:
    u: float
    length: float
    segments: int
    grid: int
    refinement_delta: float


@dataclass(frozen=True)
class CrossingCount:
    curve_id: str
    count: int
    locations: np.ndarray = field(repr=False)
    tangential: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)


def contour_segments(values: np.ndarray, u: float, periodic=(True, True)) -> np.ndarray:
    """Marching-squares segments of ``{values = u}`` in fractional index coordinates.

    Returns an ``(S, 2, 2)`` array of segment endpoints ``(i, j)``.  Periodic
    axes wrap the last row/column onto the first; saddle cells are resolved by
    the sign of the cell-centre average.
    """
    s = np.asarray(values, dtype=float) - u
    a = s
    b = np.roll(s, -1, axis=0)
    c = np.roll(b, -1, axis=1)
    d = np.roll(s, -1, axis=1)
    ni, nj = s.shape
    ci = ni if periodic[0] else ni - 1
    cj = nj if periodic[1] else nj - 1
    a, b, c, d = (x[:ci, :cj] for x in (a, b, c, d))
    pa, pb, pc, pd = a > 0, b > 0, c > 0, d > 0
    # crossing on edge e: e0 a-b, e1 b-c, e2 d-c, e3 a-d
    cross = np.stack([pa != pb, pb != pc, pd != pc, pa != pd])
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = a / (a - b)
        t1 = b / (b - c)
        t2 = d / (d - c)
        t3 = a / (a - d)
    zero = np.zeros_like(a)
    one = np.ones_like(a)
    px = np.stack([t0, one, t2, zero])
    py = np.stack([zero, t1, one, t3])
    ncross = cross.sum(axis=0)
    ii, jj = np.meshgrid(np.arange(ci), np.arange(cj), indexing="ij")

    segs = []
    # ordinary cells: exactly two crossed edges
    m2 = ncross == 2
    if np.any(m2):
        edges = np.argsort(~cross[:, m2], axis=0, kind="stable")[:2]
        cols = np.arange(edges.shape[1])
        x2, y2 = px[:, m2], py[:, m2]
        p0 = np.stack([x2[edges[0], cols], y2[edges[0], cols]], axis=-1)
        p1 = np.stack([x2[edges[1], cols], y2[edges[1], cols]], axis=-1)
        base = np.stack([ii[m2], jj[m2]], axis=-1)
        segs.append(np.stack([base + p0, base + p1], axis=1))
    m4 = ncross == 4
    if np.any(m4):
        center = (a + b + c + d)[m4] / 4
        join_ac = (center > 0) == pa[m4]
        x4, y4 = px[:, m4], py[:, m4]
        pts = np.stack([x4, y4], axis=-1)  # (4, S, 2)
        base = np.stack([ii[m4], jj[m4]], axis=-1)
        # a,c joined: cut off b (e0-e1) and d (e2-e3); else cut off a (e3-e0) and c (e1-e2)
        first = np.where(join_ac[:, None], pts[0], pts[3])
        second = np.where(join_ac[:, None], pts[1], pts[0])
        third = np.where(join_ac[:, None], pts[2], pts[1])
        fourth = np.where(join_ac[:, None], pts[3], pts[2])
        segs.append(np.stack([base + first, base + second], axis=1))
        segs.append(np.stack([base + third, base + fourth], axis=1))
    if not segs:
        return np.empty((0, 2, 2))
    return np.concatenate(segs)


def _torus_length(values: np.ndarray, u: float) -> tuple[float, int]:
    segs = contour_segments(values, u)
    h = 1.0 / values.shape[0]
    if segs.shape[0] == 0:
        return 0.0, 0
    return float(np.sum(np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1)) * h), int(segs.shape[0])


def level_length(sample, u: float) -> LevelMeasurement:
    """Length of ``{T = u}`` on the unit torus from a square grid sample."""
    vals = sample.values
    if vals.ndim != 2:
        raise UnsupportedDimension("level_length needs a 2D grid")
    M = vals.shape[0]
    if M < 4 * math.ceil(math.sqrt(sample.draw.fs.n)):
        raise ResolutionTooCoarse(f"grid M={M} has fewer than 4 cells per wavelength")
    length, count = _torus_length(vals, u)
    coarse = vals[::2, ::2] if M % 2 == 0 else None
    delta = abs(length - _torus_length(coarse, u)[0]) if coarse is not None else math.nan
    return LevelMeasurement(float(u), length, count, M, delta)


def _bisect(fn, lo, hi, flo):
    """Vectorised bisection for sign changes of ``fn`` on brackets [lo, hi]."""
    while lo.size and np.max(hi - lo) > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        fm = fn(mid)
        same = (fm > 0) == (flo > 0)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def crossings(restriction, sep_tol: float | None = None) -> CrossingCount:
    """Zeros of T along a closed curve, refined by bisection on the exact restriction.

    Transversal zeros come from sign changes between nodes.  Touching zeros
    are extrema of T along the curve where T vanishes to rounding; each is
    counted once, reported in ``tangential``, and absorbs any spurious pair of
    sign changes that rounding produces around it.
    """
    curve = restriction.curve
    t = restriction.t
    K = t.shape[0]
    L = curve.length
    h = L / K
    fs = restriction.fs
    if fs is not None and K < 16 * L * math.sqrt(fs.n):
        raise SamplingTooCoarse(f"K={K} nodes too few for sqrt(n)={math.sqrt(fs.n):.3g}")
    sep_tol = h / 2 if sep_tol is None else sep_tol
    v = restriction.values
    scale = max(1.0, float(np.max(np.abs(v))))

    idx = np.flatnonzero((v > 0) != np.roll(v > 0, -1))
    roots = np.mod(_bisect(restriction.evaluate, t[idx], t[idx] + h, v[idx]), L)

    dv = restriction.dvalues
    ext = np.flatnonzero((dv > 0) != np.roll(dv > 0, -1))
    touch = np.empty(0)
    if ext.size:
        cand = np.mod(_bisect(restriction.derivative, t[ext], t[ext] + h, dv[ext]), L)
        touch = np.sort(cand[np.abs(restriction.evaluate(cand)) <= TOUCH_TOL * scale])

    if touch.size and roots.size:
        d = np.abs(roots[:, None] - touch[None, :])
        d = np.minimum(d, L - d)
        roots = roots[np.all(d > sep_tol, axis=1)]
    roots = np.sort(roots)
    if roots.size > 1:
        gaps = np.diff(np.append(roots, roots[0] + L))
        if np.any(gaps <= sep_tol):
            raise SamplingTooCoarse("two crossings closer than the separation tolerance")
    if roots.size:
        # a genuine transversal zero has a nonvanishing tangential derivative
        flat = np.abs(restriction.derivative(roots)) < TANGENTIAL_TOL
        touch = np.sort(np.concatenate([touch, roots[flat]]))
        roots = roots[~flat]
    locs = np.sort(np.concatenate([roots, touch]))
    return CrossingCount(restriction.curve_id, int(locs.size), locs, touch)


def nodal_area_3d(sample, u: float = 0.0) -> float:
    """Area of ``{T = u}`` on the unit 3-torus by marching cubes with periodic wrap."""
    vals = sample.values
    if vals.ndim != 3:
        raise UnsupportedDimension("nodal_area_3d needs a 3D grid")
    M = vals.shape[0]
    if M < 4 * math.ceil(math.sqrt(sample.draw.fs.n)):
        raise ResolutionTooCoarse(f"grid M={M} has fewer than 4 cells per wavelength")
    return _cube_area(vals, u)


def _cube_area(vals: np.ndarray, u: float) -> float:
    M = vals.shape[0]
    padded = np.pad(vals, ((0, 1),) * 3, mode="wrap")
    if not (padded.min() < u < padded.max()):
        return 0.0
    try:
        verts, faces, _, _ = marching_cubes(padded, level=u, spacing=(1.0 / M,) * 3)
    except (ValueError, RuntimeError):
        return 0.0
    return float(mesh_surface_area(verts, faces))


def nodal_area_refinement(sample, u: float = 0.0) -> tuple[float, float]:
    """Area and |area(M) - area(M/2)| self-check."""
    full = nodal_area_3d(sample, u)
    vals = sample.values
    if vals.shape[0] % 2:
        return full, math.nan
    coarse = _cube_area(vals[::2, ::2, ::2], u)
    return full, abs(full - coarse)

