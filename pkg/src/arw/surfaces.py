"""Compact toral surfaces in the 3-torus: quadrature, normal moments, nodal intersections.

Surfaces are given as radial or flat charts.  Each carries a product
quadrature (Gauss-Legendre in ``cos(theta)`` times a uniform azimuthal rule
for the spherical kinds, midpoint rule for flat patches) and a chart grid used
to trace the nodal intersection curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArwError, NonAdmissible, ResolutionTooCoarse
from .lattice import FrequencySet, admissible3d, direction_tensor
from .levelset import contour_segments

_KINDS = {"sphere", "hemisphere", "plane", "octa"}
STATIC_TOL = 1e-6


@dataclass(frozen=True)
class SurfaceSpec:
    kind: str
    params: dict[str, float] = field(default_factory=dict)


def parse_surface(text: str) -> SurfaceSpec:
    """Parse ``sphere:r=0.2,cx=0.5,cy=0.5,cz=0.5`` style descriptors."""
    kind, _, body = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind not in _KINDS:
        raise ArwError(f"unknown surface kind {kind!r}")
    params = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ArwError(f"malformed surface parameter {item!r}")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise ArwError(f"non-numeric value in {item!r}") from None
    return SurfaceSpec(kind, params)


@dataclass
class ToralSurface:
    spec: SurfaceSpec
    points: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    area: float
    exact_area: float | None = None

    @property
    def center(self) -> np.ndarray:
        p = self.spec.params
        return np.array([p.get("cx", 0.5), p.get("cy", 0.5), p.get("cz", 0.5)])


@dataclass(frozen=True)
class SurfaceAudit:
    I2: float
    I4: float
    Ik: dict[int, float]
    second_moments: np.ndarray
    classification: str
    area: float


def _radial(spec: SurfaceSpec, omega: np.ndarray):
    """Radius, surface normal and area factor for the radial kinds."""
    R = spec.params.get("r", 0.2)
    if spec.kind == "octa":
        eps = spec.params.get("eps", 0.1)
        q = np.sum(omega**4, axis=-1, keepdims=True)
        r = R * (1 + eps * (q - 0.6))
        grad = 4 * R * eps * (omega**3 - q * omega)
    else:
        r = np.full(omega.shape[:-1] + (1,), R)
        grad = np.zeros_like(omega)
    root = np.sqrt(r**2 + np.sum(grad**2, axis=-1, keepdims=True))
    normal = (r * omega - grad) / root
    return r[..., 0], normal, (r * root)[..., 0]


def build_surface(spec: SurfaceSpec | str, n_theta: int = 256, n_phi: int = 512) -> ToralSurface:
    if isinstance(spec, str):
        spec = parse_surface(spec)
    p = spec.params
    if spec.kind == "plane":
        w = p.get("w", 0.5)
        if w <= 0 or w > 1:
            raise ArwError("plane patch side must lie in (0, 1]")
        s = (np.arange(n_phi) + 0.5) / n_phi * w - w / 2
        uu, vv = np.meshgrid(s, s, indexing="ij")
        c = np.array([p.get("cx", 0.5), p.get("cy", 0.5), p.get("cz", 0.5)])
        pts = c + np.stack([uu.ravel(), vv.ravel(), np.zeros(uu.size)], axis=1)
        normals = np.tile([0.0, 0.0, 1.0], (uu.size, 1))
        weights = np.full(uu.size, (w / n_phi) ** 2)
        return ToralSurface(spec, pts, normals, weights, float(weights.sum()), w * w)
    R = p.get("r", 0.2)
    if R <= 0 or R >= 0.5:
        raise ArwError("surface radius must lie in (0, 1/2)")
    if spec.kind == "octa" and abs(p.get("eps", 0.1)) >= 0.5:
        raise ArwError("octa perturbation must satisfy |eps| < 1/2")
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    if spec.kind == "hemisphere":
        x, wx = (x + 1) / 2, wx / 2
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    ct = np.repeat(x, n_phi)
    st = np.sqrt(1 - ct**2)
    ph = np.tile(phi, n_theta)
    omega = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)
    r, normals, factor = _radial(spec, omega)
    weights = np.repeat(wx, n_phi) * (2 * math.pi / n_phi) * factor
    c = np.array([p.get("cx", 0.5), p.get("cy", 0.5), p.get("cz", 0.5)])
    pts = c + r[:, None] * omega
    exact = {"sphere": 4 * math.pi * R**2, "hemisphere": 2 * math.pi * R**2}.get(spec.kind)
    return ToralSurface(spec, pts, normals, weights, float(weights.sum()), exact)


def normal_moment(s: ToralSurface, alpha) -> float:
    n = s.normals
    return float(s.weights @ (n[:, 0] ** alpha[0] * n[:, 1] ** alpha[1] * n[:, 2] ** alpha[2]) / s.area)


def moment_sum(s: ToralSurface, k: int) -> float:
    """Normalised ``(1/A^2) iint <n, n'>^k`` via the multinomial moment expansion."""
    total = 0.0
    for i in range(k + 1):
        for j in range(k + 1 - i):
            l = k - i - j
            coef = math.factorial(k) // (math.factorial(i) * math.factorial(j) * math.factorial(l))
            total += coef * normal_moment(s, (i, j, l)) ** 2
    return total


def audit_surface(s: ToralSurface, kmax: int = 8) -> SurfaceAudit:
    if kmax > 8 or kmax < 2 or kmax % 2:
        raise ArwError("kmax must be even and lie in 2..8")
    second = (s.normals.T * s.weights) @ s.normals / s.area
    Ik = {k: moment_sum(s, k) for k in range(0, kmax + 1, 2)}
    static = np.max(np.abs(second - np.eye(3) / 3)) < STATIC_TOL
    if static and abs(Ik[4] - 0.2) < STATIC_TOL:
        cls = "doubly_static"
    elif static:
        cls = "static"
    else:
        cls = "generic"
    return SurfaceAudit(Ik[2], Ik[4], Ik, second, cls, s.area)


def surface_direction_integral(s: ToralSurface, lam, lam2, k: int, k2: int) -> float:
    """(1/A) int <lam^, n>^k <lam2^, n>^k2 dsigma."""
    a = np.asarray(lam, dtype=float)
    b = np.asarray(lam2, dtype=float)
    pa = s.normals @ (a / np.linalg.norm(a))
    pb = s.normals @ (b / np.linalg.norm(b))
    return float(s.weights @ (pa**k * pb**k2) / s.area)


@dataclass(frozen=True)
class LatticeSurfaceSums:
    mean_I22: float
    mean_I22_weighted: float
    s4: float


def mixed_lattice_surface_sums(s: ToralSurface, fs: FrequencySet) -> LatticeSurfaceSums:
    """Normalised double sums over lattice pairs of the surface integral I(2,2).

    ``mean_I22 = N^-2 sum I(2,2)`` and
    ``mean_I22_weighted = N^-2 sum I(2,2) <lam^, lam'^>^2``, both reduced to
    single surface integrals through the lattice direction tensors.
    """
    if fs.dim != 3:
        raise ArwError("lattice-surface sums need a 3D frequency set")
    if not admissible3d(fs.n) or fs.count == 0:
        raise NonAdmissible(f"n={fs.n} is not admissible in dimension 3")
    S = direction_tensor(fs.unit, 2)
    T = direction_tensor(fs.unit, 4)
    nrm = s.normals
    w = s.weights / s.area
    quad = np.einsum("mi,ij,mj->m", nrm, S, nrm)
    TT = np.einsum("abkl,mk,ml->mab", T, nrm, nrm)
    return LatticeSurfaceSums(
        mean_I22=float(w @ quad**2),
        mean_I22_weighted=float(w @ np.sum(TT**2, axis=(1, 2))),
        s4=float(np.sum(T**2)),
    )


# -- chart grids for nodal intersections ---------------------------------------

@dataclass(frozen=True)
class Chart:
    """Parameter grid ``(u_i, v_j)`` with embedded points ``X[i, j]``."""

    surface: ToralSurface
    u: np.ndarray
    v: np.ndarray
    periodic: tuple[bool, bool]
    X: np.ndarray = field(repr=False)

    def embed(self, ij: np.ndarray) -> np.ndarray:
        """Map fractional grid coordinates to points on the surface."""
        return _from_params(self.surface, _lerp(self.u, ij[..., 0]), _lerp(self.v, ij[..., 1]))


def _lerp(grid: np.ndarray, f: np.ndarray) -> np.ndarray:
    # grids are uniform; periodic axes may run one cell past the end
    return grid[0] + f * (grid[1] - grid[0])


def make_chart(s: ToralSurface, nu: int, nv: int) -> Chart:
    if s.spec.kind == "plane":
        w = s.spec.params.get("w", 0.5)
        u = np.linspace(-w / 2, w / 2, nu)
        v = np.linspace(-w / 2, w / 2, nv)
        periodic = (False, False)
    else:
        top = math.pi / 2 if s.spec.kind == "hemisphere" else math.pi
        u = np.linspace(0.0, top, nu)
        v = 2 * math.pi * np.arange(nv) / nv
        periodic = (False, True)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    return Chart(s, u, v, periodic, _from_params(s, uu, vv))


def _from_params(s: ToralSurface, uu, vv) -> np.ndarray:
    c = s.center
    if s.spec.kind == "plane":
        return c + np.stack([uu, vv, np.zeros_like(uu)], axis=-1)
    omega = np.stack([np.sin(uu) * np.cos(vv), np.sin(uu) * np.sin(vv), np.cos(uu)], axis=-1)
    r, _, _ = _radial(s.spec, omega)
    return c + r[..., None] * omega


def nodal_intersection_length(s: ToralSurface, draw, nu: int = 257, nv: int = 512) -> float:
    """Length of ``{T = 0}`` on the surface, traced by marching squares in the chart.

    Segment endpoints are mapped back through the chart so lengths are
    measured in the embedding metric.
    """
    from .field import evaluate

    chart = make_chart(s, nu, nv)
    X = chart.X
    step = max(
        float(np.max(np.linalg.norm(np.diff(X, axis=0), axis=-1))),
        float(np.max(np.linalg.norm(np.diff(X, axis=1), axis=-1))),
    )
    if step > 1.0 / (4 * math.sqrt(draw.fs.n)):
        raise ResolutionTooCoarse(f"chart spacing {step:.3g} exceeds a quarter wavelength")
    vals = evaluate(draw, X.reshape(-1, 3)).reshape(nu, nv)
    segs = contour_segments(vals, 0.0, chart.periodic)
    if segs.shape[0] == 0:
        return 0.0
    ends = chart.embed(segs)
    return float(np.sum(np.linalg.norm(ends[:, 1] - ends[:, 0], axis=-1)))
