"""Closed reference curves on the 2-torus and their direction functionals.

Curves are sampled at ``K`` nodes equispaced in arc length, so every curve
functional is a periodic trapezoid rule (spectrally accurate for the smooth
descriptors supported here).  Positions are kept unwrapped in the plane; the
field is periodic so no reduction mod 1 is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArwError, CurvatureVanishes, CurveDoesNotClose, WeightsNotNormalized

DEFAULT_NODES = 4096
STATIC_TOL = 1e-8
MIN_CURVATURE = 1e-6
CLOSURE_TOL = 1e-10

_KINDS = {"circle", "ellipse", "kfold", "custom"}


@dataclass(frozen=True)
class CurveSpec:
    kind: str
    params: dict[str, float] = field(default_factory=dict)

    def __str__(self) -> str:
        body = ",".join(f"{k}={_fmt(v)}" for k, v in self.params.items())
        return f"{self.kind}:{body}" if body else self.kind


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(float(v))


def parse_descriptor(text: str) -> CurveSpec:
    """Parse ``kind:key=value,...`` (e.g. ``kfold:k=3,r=0.2,eps=0.05``)."""
    kind, _, body = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind not in _KINDS:
        raise ArwError(f"unknown curve kind {kind!r} in {text!r}")
    params: dict[str, float] = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ArwError(f"malformed curve parameter {item!r} in {text!r}")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise ArwError(f"non-numeric value in {item!r}") from None
    return CurveSpec(kind, params)


def _tangent_angle_model(spec: CurveSpec):
    """Return (length, phi, dphi) for curves given by their tangent angle.

    ``phi(tau)`` is the tangent angle at normalised arc length ``tau`` in
    [0, 1); ``dphi`` is its derivative in ``tau``.
    """
    p = dict(spec.params)
    r = p.pop("r", 0.2)
    rot = p.pop("rot", 0.0)
    p.pop("cx", None), p.pop("cy", None)
    if r <= 0:
        raise ArwError("curve radius must be positive")
    harmonics: list[tuple[int, float, float]] = []
    if spec.kind == "circle":
        if r >= 0.5:
            raise ArwError("circle radius must be < 1/2")
        if p:
            raise ArwError(f"unexpected circle parameters {sorted(p)}")
    elif spec.kind == "kfold":
        k = int(p.pop("k", 3))
        eps = p.pop("eps", 0.05)
        if k < 2 or p:
            raise ArwError("kfold needs k >= 2 and only k, r, eps, rot, cx, cy")
        harmonics.append((k, 0.0, eps))
    else:
        modes: dict[int, list[float]] = {}
        for key, val in p.items():
            if len(key) < 2 or key[0] not in "ab" or not key[1:].isdigit():
                raise ArwError(f"custom curve parameters are a<m>/b<m>, got {key!r}")
            m = int(key[1:])
            if m < 1:
                raise ArwError("custom harmonic index must be >= 1")
            modes.setdefault(m, [0.0, 0.0])["ab".index(key[0])] = val
        harmonics.extend((m, a, b) for m, (a, b) in sorted(modes.items()))

    phase0 = math.pi / 2 + rot
    two_pi = 2 * math.pi

    def phi(tau):
        out = two_pi * tau + phase0
        for m, a, b in harmonics:
            out = out + a * np.cos(two_pi * m * tau) + b * np.sin(two_pi * m * tau)
        return out

    def dphi(tau):
        out = np.full_like(np.asarray(tau, dtype=float), two_pi)
        for m, a, b in harmonics:
            w = two_pi * m
            out = out - a * w * np.sin(w * tau) + b * w * np.cos(w * tau)
        return out

    return two_pi * r, phi, dphi


class ToralCurve:
    """Arc-length sampled closed curve.

    Attributes
    ----------
    length : float
    nodes : ndarray (K,)
        Arc-length parameters ``t_j = j L / K``.
    tangent, position : ndarray (K, 2)
    curvature : ndarray (K,)
    """

    def __init__(self, spec: CurveSpec, K: int = DEFAULT_NODES):
        if K < 256 or K % 2:
            raise ArwError("K must be even and >= 256")
        self.spec = spec
        self.K = K
        cx = spec.params.get("cx", 0.5)
        cy = spec.params.get("cy", 0.5)
        self.center = np.array([cx, cy])
        if spec.kind == "ellipse":
            self._build_ellipse()
        else:
            self._build_tangent_angle()
        self.nodes = np.arange(K) * (self.length / K)
        self.tangent, self.curvature = self._frame(self.nodes)
        self.position = self.position_at(self.nodes)
        if np.min(np.abs(self.curvature)) <= MIN_CURVATURE:
            raise CurvatureVanishes(f"curvature vanishes on {spec}")

    # -- construction -------------------------------------------------------
    def _build_tangent_angle(self):
        L, phi, dphi = _tangent_angle_model(self.spec)
        self.length = L
        self._phi, self._dphi = phi, dphi
        dense = max(4 * self.K, 8192)
        tau = np.arange(dense) / dense
        if np.any(dphi(tau) <= 0) and np.any(dphi(tau) >= 0):
            raise CurvatureVanishes(f"tangent angle is not monotone on {self.spec}")
        g = np.fft.fft(np.exp(1j * phi(tau))) / dense
        if abs(g[0]) * L > CLOSURE_TOL:
            raise CurveDoesNotClose(f"{self.spec} fails to close by {abs(g[0]) * L:.3e}")
        m = np.fft.fftfreq(dense, 1.0 / dense)
        coef = np.zeros_like(g)
        nz = m != 0
        coef[nz] = L * g[nz] / (2j * math.pi * m[nz])
        keep = np.abs(coef) > 1e-17 * L
        self._modes = m[keep]
        self._coef = coef[keep]

    def _build_ellipse(self):
        p = self.spec.params
        a, b = p.get("a", 0.2), p.get("b", 0.1)
        if a <= 0 or b <= 0:
            raise ArwError("ellipse semi-axes must be positive")
        self._ab = (a, b)
        self._rot = p.get("rot", 0.0)
        dense = max(4 * self.K, 8192)
        th = 2 * math.pi * np.arange(dense) / dense
        speed = np.hypot(a * np.sin(th), b * np.cos(th))
        sh = np.fft.fft(speed) / dense
        self.length = 2 * math.pi * sh[0].real
        m = np.fft.fftfreq(dense, 1.0 / dense)
        keep = (m != 0) & (np.abs(sh) > 1e-17 * sh[0].real)
        self._s_modes = m[keep]
        self._s_coef = sh[keep] / (1j * m[keep])

    # -- evaluation ---------------------------------------------------------
    def _ellipse_theta(self, t):
        """Invert arc length s(theta) = t by Newton iteration."""
        a, b = self._ab
        L = self.length
        t = np.asarray(t, dtype=float)
        th = 2 * math.pi * t / L
        offset = np.real(np.sum(self._s_coef))
        converged = 0
        for _ in range(60):
            s = L * th / (2 * math.pi) + np.real(
                np.exp(1j * np.multiply.outer(th, self._s_modes)) @ self._s_coef
            ) - offset
            ds = np.hypot(a * np.sin(th), b * np.cos(th))
            step = (s - t) / ds
            th = th - step
            # quadratic convergence: two more sweeps after the step hits 1e-12
            if np.max(np.abs(step), initial=0.0) < 1e-12:
                converged += 1
                if converged > 2:
                    break
        return th

    def _frame(self, t):
        t = np.asarray(t, dtype=float)
        if self.spec.kind == "ellipse":
            a, b = self._ab
            th = self._ellipse_theta(t)
            sp = np.hypot(a * np.sin(th), b * np.cos(th))
            tx, ty = -a * np.sin(th) / sp, b * np.cos(th) / sp
            c, s = math.cos(self._rot), math.sin(self._rot)
            tan = np.stack([c * tx - s * ty, s * tx + c * ty], axis=-1)
            return tan, a * b / sp**3
        tau = t / self.length
        ang = self._phi(tau)
        tan = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        return tan, self._dphi(tau) / self.length

    def tangent_at(self, t) -> np.ndarray:
        return self._frame(t)[0]

    def position_at(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.spec.kind == "ellipse":
            a, b = self._ab
            th = self._ellipse_theta(t)
            x, y = a * np.cos(th), b * np.sin(th)
            c, s = math.cos(self._rot), math.sin(self._rot)
            return self.center + np.stack([c * x - s * y, s * x + c * y], axis=-1)
        z = np.exp(2j * math.pi * np.multiply.outer(t / self.length, self._modes)) @ self._coef
        return self.center + np.stack([z.real, z.imag], axis=-1)

    def closure_error(self) -> float:
        end = self.position_at(np.array([self.length]))[0]
        return float(np.linalg.norm(end - self.position[0]))

    def mean(self, values) -> float:
        """Arc-length average (1/L) int f dt by the periodic trapezoid rule."""
        return float(np.mean(values))


@dataclass(frozen=True)
class CurveAudit:
    length: float
    A: float
    B: float
    I2: float
    I2perp: float
    I4: float
    I4prime: float
    B_uniform: float
    A_uniform: float
    int_g11: float
    int_g12: float
    min_curvature: float
    classification: str

    @property
    def is_static(self) -> bool:
        return self.classification in ("static", "doubly_static")

    @property
    def is_doubly_static(self) -> bool:
        return self.classification == "doubly_static"


def build_curve(spec: CurveSpec | str, K: int = DEFAULT_NODES) -> ToralCurve:
    if isinstance(spec, str):
        spec = parse_descriptor(spec)
    return ToralCurve(spec, K)


def tangent_moments(curve: ToralCurve) -> np.ndarray:
    """``m[i] = (1/L) int g1^i g2^(4-i) dt`` for i = 0..4."""
    g1, g2 = curve.tangent[:, 0], curve.tangent[:, 1]
    return np.array([np.mean(g1**i * g2 ** (4 - i)) for i in range(5)])


def tangent_tensor(curve: ToralCurve, order: int = 4) -> np.ndarray:
    res = np.ones(curve.K)
    for k in range(order):
        res = res[..., None] * curve.tangent.reshape((curve.K,) + (1,) * k + (2,))
    return res.mean(axis=0)


def audit(curve: ToralCurve, tol: float = STATIC_TOL) -> CurveAudit:
    g = curve.tangent
    g1, g2 = g[:, 0], g[:, 1]
    L = curve.length
    second = g.T @ g / curve.K
    P = np.array([[0.0, 1.0], [1.0, 0.0]])
    I2 = float(np.sum(second**2))
    I2perp = float(np.trace(P @ second @ P @ second))
    m = tangent_moments(curve)
    I4 = float(sum(math.comb(4, i) * m[i] ** 2 for i in range(5)))
    A = float(m[2])
    B = float(np.mean(g1**3 * g2))
    I4p = float(np.mean(g1**4 + g2**4 - 6 * g1**2 * g2**2))
    int_g11 = L * float(second[0, 0])
    int_g12 = L * float(second[0, 1])
    static = abs(int_g11 - L / 2) + abs(int_g12) < tol * L
    if static and abs(I4 - 0.375) < tol:
        cls = "doubly_static"
    elif static:
        cls = "static"
    else:
        cls = "generic"
    B_u = b_functional(curve, *uniform_measure(4096))
    A_u = a_functional(curve, *uniform_measure(64))
    return CurveAudit(
        length=L, A=A, B=B, I2=I2, I2perp=I2perp, I4=I4, I4prime=I4p,
        B_uniform=B_u, A_uniform=A_u, int_g11=int_g11, int_g12=int_g12,
        min_curvature=float(np.min(np.abs(curve.curvature))), classification=cls,
    )


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def direction_integral(curve: ToralCurve, lam, lam2, k: int, k2: int) -> float:
    """(1/L) int <lam^, g'>^k <lam2^, g'>^k2 dt for unit directions lam^, lam2^."""
    if not (0 <= k <= 4 and 0 <= k2 <= 4):
        raise ArwError("direction integral orders must lie in 0..4")
    p = curve.tangent @ _unit(lam)
    q = curve.tangent @ _unit(lam2)
    return float(np.mean(p**k * q**k2))


def direction_table(curve: ToralCurve, units_a, units_b, k: int, k2: int) -> np.ndarray:
    """Matrix of direction integrals over two lists of unit directions."""
    pa = np.asarray(units_a, dtype=float) @ curve.tangent.T
    pb = np.asarray(units_b, dtype=float) @ curve.tangent.T
    return (pa**k) @ (pb**k2).T / curve.K


def uniform_measure(count: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    th = 2 * math.pi * np.arange(count) / count
    return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(count, 1.0 / count)


def lattice_measure(fs) -> tuple[np.ndarray, np.ndarray]:
    return fs.unit, np.full(fs.count, 1.0 / fs.count)


def _check_measure(directions, weights):
    d = _unit(directions)
    w = np.asarray(weights, dtype=float)
    if d.shape[0] != w.shape[0]:
        raise WeightsNotNormalized("directions and weights differ in length")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise WeightsNotNormalized(f"weights must be >= 0 and sum to 1 (sum={w.sum()!r})")
    return d, w


def b_functional(curve: ToralCurve, directions, weights) -> float:
    d, w = _check_measure(directions, weights)
    inner = curve.length * np.mean((d @ curve.tangent.T) ** 2, axis=1)
    return float(w @ inner**2)


def a_functional(curve: ToralCurve, directions, weights) -> float:
    d, w = _check_measure(directions, weights)
    T = tangent_tensor(curve).reshape(4, 4)
    d2 = (d[:, :, None] * d[:, None, :]).reshape(-1, 4)
    inner = curve.length * (d2 @ T @ d2.T)
    return float(w @ inner**2 @ w)


MeasureFn = Callable[[ToralCurve], tuple[np.ndarray, np.ndarray]]
