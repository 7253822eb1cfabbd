"""Closed-form Wiener-chaos components computed exactly from coefficient draws.

Every statistic is a function of ``x_lam = |a_lam|^2 - 1`` over the half-set.
Second-chaos statistics are linear in ``x``; fourth-chaos statistics are
quadratic forms ``x^T C x + c0`` times a deterministic prefactor.

With ``wick=True`` (the default) each quadratic form is replaced by its exact
fourth-chaos projection: the diagonal ``x_i^2`` becomes ``x_i^2 - 2 x_i - 1``
and constants are dropped, so the column is centred and orthogonal to every
second-chaos variable.  ``wick=False`` evaluates the displayed forms as
written, diagonal and constant included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import ToralCurve, audit, direction_table
from .errors import ArwError, NotDoublyStatic, NotStatic, UnsupportedDimension
from .lattice import FrequencySet, mu4
from .surfaces import ToralSurface, audit_surface


def hermite_a(u):
    """a(u) = H4(u)/4 + H2(u)/2 - 1/8 = u^4/4 - u^2 + 1/8."""
    u = np.asarray(u, dtype=float)
    out = 0.25 * u**4 - u**2 + 0.125
    return float(out) if out.ndim == 0 else out


def phi(u):
    return math.exp(-u * u / 2) / math.sqrt(2 * math.pi)


def level_tag(u: float) -> str:
    return f"{u:g}"


@dataclass(frozen=True)
class QuadForm:
    """``prefactor * (x^T C x + const)`` over the half-set."""

    prefactor: float
    C: np.ndarray = field(repr=False)
    const: float

    def evaluate(self, X: np.ndarray, wick: bool = True) -> np.ndarray:
        X = np.atleast_2d(X)
        q = np.einsum("si,ij,sj->s", X, self.C, X, optimize=True)
        if wick:
            q = q - X @ (2 * np.diag(self.C)) - np.trace(self.C)
        else:
            q = q + self.const
        return self.prefactor * q


@dataclass(frozen=True)
class LinForm:
    """``prefactor * b^T x``."""

    prefactor: float
    b: np.ndarray = field(repr=False)

    def evaluate(self, X: np.ndarray, wick: bool = True) -> np.ndarray:
        return self.prefactor * (np.atleast_2d(X) @ self.b)


@dataclass
class CurveTerms:
    curve_id: str
    curve: ToralCurve
    audit: object
    i20: np.ndarray = field(repr=False)
    i22: np.ndarray = field(repr=False)
    i40: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ChaosVector:
    W1: float
    W2: float | None
    W3: float | None
    W4: float | None
    L2_at: dict[float, float]
    L4_at: dict[float, float]
    Z2: dict[str, float]
    Z4: dict[str, float]
    Z4_dd: dict[str, float]
    A4: float | None
    M4: dict[str, float]
    Z_norm: float


def x_values(coeffs: np.ndarray) -> np.ndarray:
    return np.abs(coeffs) ** 2 - 1.0


class ChaosModel:
    """Precomputed forms for one frequency set, level list and set of curves/surfaces."""

    def __init__(self, fs: FrequencySet, levels=(0.0, 1.0, 2.0), curves=None, surfaces=None,
                 wick: bool = True):
        if fs.count == 0:
            raise ArwError("empty frequency set")
        self.fs = fs
        self.wick = wick
        self.levels = [float(u) for u in levels]
        self.curves: dict[str, CurveTerms] = {}
        self.surfaces: dict[str, tuple[ToralSurface, object]] = {}
        N = fs.count
        self.N = N
        self.half = fs.half.astype(float)
        self.units = fs.half_unit
        self.gram = self.units @ self.units.T
        self.energy = 4 * math.pi**2 * fs.n
        self.forms: dict[str, QuadForm | LinForm] = {}
        root = math.sqrt(N / 2)
        if fs.dim == 2:
            h, n = self.half, fs.n
            self.forms["W1"] = LinForm(1 / root, np.ones(len(h)))
            self.forms["W2"] = LinForm(1 / (n * root), h[:, 0] ** 2)
            self.forms["W3"] = LinForm(1 / (n * root), h[:, 1] ** 2)
            self.forms["W4"] = LinForm(1 / (n * root), h[:, 0] * h[:, 1])
            for u in self.levels:
                tag = level_tag(u)
                pref2 = math.sqrt(math.pi / 8) * u * u * phi(u) * math.sqrt(2 * math.pi**2 * n) * 2 / N
                self.forms[f"L2_u{tag}"] = LinForm(pref2, np.ones(len(h)))
                self.forms[f"L4_u{tag}"] = self._level_form(u)
        else:
            self.forms["W1"] = LinForm(1 / root, np.ones(len(self.half)))
            self.forms["A4"] = self._area_form()
        for cid, curve in (curves or {}).items():
            self.add_curve(cid, curve)
        for sid, surf in (surfaces or {}).items():
            self.add_surface(sid, surf)

    # -- form builders ---------------------------------------------------------
    def _level_form(self, u: float) -> QuadForm:
        a = hermite_a(u)
        N = self.N
        pref = phi(u) * math.sqrt(math.pi / 2) * math.sqrt(self.energy / 2) / N
        C = (8 * a - 2 * self.gram**2) / (4 * N)
        return QuadForm(pref, C, -(a - 0.25))

    def _area_form(self) -> QuadForm:
        N = self.N
        pref = math.sqrt(self.fs.n) / (5 * math.sqrt(3) * N) * 2
        return QuadForm(pref, (2 / N) * (1 - 3 * self.gram**2), 2.0)

    def add_curve(self, cid: str, curve: ToralCurve) -> None:
        if self.fs.dim != 2:
            raise UnsupportedDimension("curves live on the 2-torus")
        au = audit(curve)
        i20 = np.diag(direction_table(curve, self.units, self.units, 2, 0)).copy()
        i22 = direction_table(curve, self.units, self.units, 2, 2)
        i40 = direction_table(curve, self.units, self.units, 4, 0).diagonal().copy()
        terms = CurveTerms(cid, curve, au, i20, i22, i40)
        self.curves[cid] = terms
        N, n, L = self.N, self.fs.n, curve.length
        if au.classification == "generic":
            pref = math.sqrt(2 * math.pi**2 * n) / (2 * math.pi) * (2 / N) * L
            self.forms[f"Z2_{cid}"] = LinForm(pref, 2 * i20 - 1)
            return
        pref4 = math.sqrt(2 * n) / (4 * N) * L
        # the single-index sum runs over all of Lambda; I(4,0) is even in lam
        const = (2 / N) * float(np.sum(4 * i40 - 1))
        self.forms[f"Z4_{cid}"] = QuadForm(pref4, (2 / N) * (1 - 4 * i22), const)
        if au.classification == "doubly_static":
            self.forms[f"Z4dd_{cid}"] = QuadForm(pref4, (2 / N) * (0.5 - self.gram**2), 0.5)

    def add_surface(self, sid: str, surf: ToralSurface) -> None:
        if self.fs.dim != 3:
            raise UnsupportedDimension("surfaces live on the 3-torus")
        au = audit_surface(surf, 4)
        self.surfaces[sid] = (surf, au)
        if au.classification == "generic":
            raise NotStatic(f"surface {sid} is not static")
        nrm, w = surf.normals, surf.weights / surf.area
        p = nrm @ self.units.T
        p2 = p**2
        i22 = (p2.T * w) @ p2
        N, n, A = self.N, self.fs.n, surf.area
        pref = math.sqrt(4 * math.pi**2 * n / 3) * 6 / (128 * N) * A / 15
        C = (10 / N) * (5 - 27 * i22 - 6 * self.gram**2)
        self.forms[f"M4_{sid}"] = QuadForm(pref, C, 32.0)

    # -- evaluation ------------------------------------------------------------
    @property
    def columns(self) -> list[str]:
        return list(self.forms)

    def require(self, column: str) -> None:
        if column in self.forms:
            return
        kind, _, cid = column.partition("_")
        if cid in self.curves:
            cls = self.curves[cid].audit.classification
            if kind == "Z4dd":
                raise NotDoublyStatic(f"curve {cid} is {cls}, not doubly static")
            if kind == "Z4":
                raise NotStatic(f"curve {cid} is {cls}, not static")
        raise ArwError(f"unknown chaos column {column!r}")

    def evaluate(self, X: np.ndarray) -> dict[str, np.ndarray]:
        """All columns for a batch of ``x`` vectors of shape (S, N/2)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = {name: f.evaluate(X, self.wick) for name, f in self.forms.items()}
        out["Z_norm"] = X.sum(axis=1)
        return out

    def project(self, draw) -> ChaosVector:
        cols = {k: float(v[0]) for k, v in self.evaluate(x_values(draw.coeffs)).items()}
        pick = lambda prefix: {k[len(prefix):]: v for k, v in cols.items() if k.startswith(prefix)}
        return ChaosVector(
            W1=cols["W1"], W2=cols.get("W2"), W3=cols.get("W3"), W4=cols.get("W4"),
            L2_at={u: cols[f"L2_u{level_tag(u)}"] for u in self.levels if self.fs.dim == 2},
            L4_at={u: cols[f"L4_u{level_tag(u)}"] for u in self.levels if self.fs.dim == 2},
            Z2=pick("Z2_"), Z4=pick("Z4_"), Z4_dd=pick("Z4dd_"),
            A4=cols.get("A4"), M4=pick("M4_"), Z_norm=cols["Z_norm"],
        )


@dataclass(frozen=True)
class LemISums:
    sumeq20: float
    sumeq: float
    sumdif: float
    bra: float
    brasumdif: float


@dataclass(frozen=True)
class SpectralQuantities:
    I_cal: float
    J_cal: float
    lemI: LemISums
    eta: float


def spectral_quantities(fs: FrequencySet, curve: ToralCurve) -> SpectralQuantities:
    """Lattice-curve sums over all of Lambda, plus the closed forms in eta = mu4."""
    if fs.dim != 2 or fs.count == 0:
        raise ArwError("spectral quantities need a nonempty 2D frequency set")
    U = fs.unit
    N = fs.count
    i20 = direction_table(curve, U, U, 2, 0).diagonal()
    i22 = direction_table(curve, U, U, 2, 2)
    g2 = (U @ U.T) ** 2
    lem = LemISums(
        sumeq20=float(i20.mean()),
        sumeq=float(i22.diagonal().mean()),
        sumdif=float(i22.sum() / N**2),
        bra=float(g2.sum() / N**2),
        brasumdif=float((g2 * i22).sum() / N**2),
    )
    eta = mu4(fs)
    I4p = audit(curve).I4prime
    return SpectralQuantities(
        I_cal=3 / 8 + eta * I4p / 8,
        J_cal=10 / 64 + 4 / 64 * eta * I4p + 2 / 64 * eta**2,
        lemI=lem,
        eta=eta,
    )
