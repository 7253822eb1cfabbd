"""Sampling and evaluation of arithmetic random waves.

With ``a_{-lam} = conj(a_lam)`` the wave is
``T(x) = (2 / sqrt(N)) * sum_{lam in half} Re(a_lam e(<lam, x>))``,
which is how every evaluator below computes it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArwError, GridAliasesFrequencies
from .lattice import FrequencySet

TWO_PI = 2 * math.pi
DIRECT_LIMIT = 10**7
_CHUNK = 1 << 14


def sample_rng(master_seed: int, idx: int) -> np.random.Generator:
    """Counter-based stream for sample ``idx``: independent of scheduling."""
    key = np.random.SeedSequence(int(master_seed)).generate_state(2, np.uint64)
    bitgen = np.random.Philox(key=key, counter=np.array([0, 0, int(idx), 0], dtype=np.uint64))
    return np.random.Generator(bitgen)


@dataclass(frozen=True)
class CoefficientDraw:
    """Coefficients ``a_lam`` on the half-set ``fs.half`` (order preserved)."""

    fs: FrequencySet
    coeffs: np.ndarray = field(repr=False)
    seed: tuple[int, int] | None = None

    def __post_init__(self):
        if self.coeffs.shape != (int(self.fs.half_mask.sum()),):
            raise ArwError("coefficient vector does not match the half-set")

    @property
    def scale(self) -> float:
        return 2.0 / math.sqrt(self.fs.count)


def draw_coefficients(fs: FrequencySet, master_seed: int, idx: int) -> CoefficientDraw:
    if fs.count == 0:
        raise ArwError("cannot draw on an empty frequency set")
    z = sample_rng(master_seed, idx).standard_normal((fs.half.shape[0], 2))
    coeffs = (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2.0)
    return CoefficientDraw(fs, coeffs, (int(master_seed), int(idx)))


def stub_draw(fs: FrequencySet, coeffs) -> CoefficientDraw:
    """Deterministic draw from explicit half-set coefficients (scalar broadcasts)."""
    c = np.broadcast_to(np.asarray(coeffs, dtype=complex), (fs.half.shape[0],)).copy()
    return CoefficientDraw(fs, c)


def single_mode(fs: FrequencySet, lam, amplitude: float = 1.0) -> CoefficientDraw:
    """Draw with ``T(x) = amplitude * cos(2 pi <lam, x>)``; ``lam`` may be in either half."""
    lam = np.asarray(lam, dtype=np.int64)
    half = fs.half
    c = np.zeros(half.shape[0], dtype=complex)
    hit = np.flatnonzero(np.all(half == lam, axis=1))
    if hit.size == 0:
        hit = np.flatnonzero(np.all(half == -lam, axis=1))
    if hit.size == 0:
        raise ArwError(f"{lam.tolist()} is not a lattice point of norm {fs.n}")
    c[hit[0]] = amplitude * math.sqrt(fs.count) / 2
    return CoefficientDraw(fs, c)


def l2_norm_fluctuation(draw: CoefficientDraw) -> float:
    return float(np.sum(np.abs(draw.coeffs) ** 2 - 1.0))


def evaluate(draw: CoefficientDraw, x, with_gradient: bool = False):
    """Exact trigonometric sum at points ``x`` of shape (P, d)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    half = draw.fs.half.astype(float)
    vals = np.empty(x.shape[0])
    grads = np.empty(x.shape) if with_gradient else None
    for s in range(0, x.shape[0], _CHUNK):
        e = np.exp(1j * TWO_PI * (x[s : s + _CHUNK] @ half.T)) * draw.coeffs
        vals[s : s + _CHUNK] = draw.scale * e.real.sum(axis=1)
        if with_gradient:
            grads[s : s + _CHUNK] = -draw.scale * TWO_PI * (e.imag @ half)
    return (vals, grads) if with_gradient else vals


@dataclass
class FieldSample:
    draw: CoefficientDraw
    M: int
    values: np.ndarray = field(repr=False)
    grad: tuple[np.ndarray, ...] | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.values.ndim


def _check_grid(n: int, M: int):
    if M < 2 * math.ceil(math.sqrt(n)) + 1:
        raise GridAliasesFrequencies(f"grid M={M} aliases frequencies of norm sqrt({n})")


def synthesize_grid(draw: CoefficientDraw, M: int, with_gradient: bool = False,
                    method: str = "auto") -> FieldSample:
    """Values of T on the grid ``x = index / M``, exact up to rounding.

    ``method`` is ``"fft"``, ``"direct"`` or ``"auto"`` (direct summation for
    small ``N M^d``).
    """
    fs = draw.fs
    _check_grid(fs.n, M)
    if method == "auto":
        method = "direct" if fs.count * M**fs.dim <= DIRECT_LIMIT else "fft"
    if method == "fft":
        vals, grad = _synth_fft(draw, M, with_gradient)
    elif method == "direct":
        vals, grad = _synth_direct(draw, M, with_gradient)
    else:
        raise ArwError(f"unknown synthesis method {method!r}")
    return FieldSample(draw, M, vals, grad)


def _synth_fft(draw, M, with_gradient):
    fs = draw.fs
    half = fs.half
    idx = tuple((half % M).T)
    nidx = tuple(((-half) % M).T)
    shape = (M,) * fs.dim
    scale = M**fs.dim / math.sqrt(fs.count)

    def build(coef):
        C = np.zeros(shape, dtype=complex)
        np.add.at(C, idx, coef)
        np.add.at(C, nidx, np.conj(coef))
        out = np.fft.ifftn(C) * scale
        if np.max(np.abs(out.imag), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(out.real))):
            raise ArwError("synthesised field is not real")
        return out.real

    vals = build(draw.coeffs)
    grad = None
    if with_gradient:
        grad = tuple(build(draw.coeffs * 1j * TWO_PI * half[:, k]) for k in range(fs.dim))
    return vals, grad


def _synth_direct(draw, M, with_gradient):
    fs = draw.fs
    half = fs.half
    grid = np.arange(M) / M
    factors = [np.exp(1j * TWO_PI * np.outer(half[:, k], grid)) for k in range(fs.dim)]
    letters = "ijk"[: fs.dim]
    expr = ",".join(f"a{c}" for c in letters)
    sub = f"a,{expr}->{letters}"

    def build(coef):
        return draw.scale * np.einsum(sub, coef, *factors, optimize=True).real

    vals = build(draw.coeffs)
    grad = None
    if with_gradient:
        grad = tuple(build(draw.coeffs * 1j * TWO_PI * half[:, k]) for k in range(fs.dim))
    return vals, grad


@dataclass
class CurveRestriction:
    """Values of T and dT/dt at the curve nodes, plus an exact evaluator."""

    curve: object
    t: np.ndarray
    values: np.ndarray
    dvalues: np.ndarray
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    derivative: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    curve_id: str = "C"
    fs: FrequencySet | None = field(default=None, repr=False)


def restrict_to_curve(draw: CoefficientDraw, curve, curve_id: str = "C") -> CurveRestriction:
    vals, grads = evaluate(draw, curve.position, with_gradient=True)
    dvals = np.sum(grads * curve.tangent, axis=1)

    def along(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return evaluate(draw, curve.position_at(t))

    def d_along(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        _, g = evaluate(draw, curve.position_at(t), with_gradient=True)
        return np.sum(g * curve.tangent_at(t), axis=1)

    return CurveRestriction(curve, curve.nodes.copy(), vals, dvals, along, d_along,
                            curve_id, draw.fs)


def dump_field_csv(sample: FieldSample, path, seed: int | None = None) -> None:
    """Row-major dump with a three-line header (n, M, seed)."""
    seed = seed if seed is not None else (sample.draw.seed or (None,))[0]
    v = sample.values.reshape(sample.M, -1)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"n,{sample.draw.fs.n}\nM,{sample.M}\nseed,{seed}\n")
        for row in v:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def empirical_covariance(values: np.ndarray, lags) -> np.ndarray:
    """Spatial autocovariance of a periodic 2D grid at integer lags."""
    out = []
    for lag in lags:
        shifted = np.roll(values, shift=tuple(-int(s) for s in lag), axis=(0, 1))
        out.append(float(np.mean(values * shifted)))
    return np.array(out)


def exact_covariance(fs: FrequencySet, tau) -> np.ndarray:
    tau = np.atleast_2d(np.asarray(tau, dtype=float))
    return np.cos(TWO_PI * tau @ fs.points.T.astype(float)).mean(axis=1)
