"""Closed-form asymptotic predictions: variances, correlations, partial correlations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chaos import hermite_a
from .errors import ArwError, NotStatic

DEDUP_TOL = 1e-12


@dataclass(frozen=True)
class TheoryPrediction:
    kind: str
    value: float
    inputs: dict = field(default_factory=dict)


def energy(n: int) -> float:
    return 4 * math.pi**2 * n


def var_nodal_length(n: int, N: int, eta: float) -> float:
    return (1 + eta**2) / 512 * energy(n) / N**2


def var_level_length(u: float, n: int, N: int, eta: float | None = None) -> float:
    """Leading variance of the level-u length; u = 0 is routed to the nodal form."""
    if u == 0:
        if eta is None:
            raise ArwError("the nodal variance needs eta")
        return var_nodal_length(n, N, eta)
    return u**4 * math.exp(-(u**2)) / 32 * energy(n) / N


def var_crossings_static(n: int, N: int, L: float, eta: float, I4: float, I4p: float) -> float:
    return n / (4 * N**2) * L**2 / 4 * (2 * (1 - eta**2) * (2 * I4 - 1) + (eta * I4p + 1) ** 2)


def var_crossings_generic(n: int, N: int, L: float, B: float) -> float:
    """Variance of the second-chaos crossing term given B_C(mu_n)."""
    return n / N * (4 * B - L**2)


def _check_static(audit) -> None:
    if audit is not None and not audit.is_static:
        raise NotStatic(f"curve audit is {audit.classification}, not static")


def _static_denominator(eta: float, I4: float, I4p: float) -> float:
    return 2 * (1 - eta**2) * (2 * I4 - 1) + (eta * I4p + 1) ** 2


def corr_nodal_static(eta: float, I4: float, I4p: float, audit=None) -> float:
    """Limit correlation between nodal length and crossings with a static curve."""
    _check_static(audit)
    if not -1 <= eta <= 1:
        raise ArwError("eta must lie in [-1, 1]")
    num = 1 + 2 * eta * I4p + eta**2
    den = _static_denominator(eta, I4, I4p)
    if num == 0 and den == 0:
        # eta = +-1 with I4p = -+1: both vanish, the limit along eta is 0
        return 0.0
    return num / (math.sqrt(2) * math.sqrt(1 + eta**2) * math.sqrt(den))


def _level_bracket(a: float, eta: float) -> float:
    return 2 * a * a - a / 2 + (3 + eta**2) / 64


def partial_corr_levels(u1: float, u2: float, eta: float) -> float:
    """M(u1, u2; eta)."""
    a1, a2 = hermite_a(u1), hermite_a(u2)
    cov = 2 * a1 * a2 - (a1 + a2) / 4 + (3 + eta**2) / 64
    return cov / math.sqrt(_level_bracket(a1, eta) * _level_bracket(a2, eta))


def partial_corr_level_static(u: float, eta: float, I4: float, I4p: float, audit=None) -> float:
    """f_{C'}(u; eta)."""
    _check_static(audit)
    num = math.sqrt(2) / 16 * (1 + 2 * eta * I4p + eta**2)
    den = _static_denominator(eta, I4, I4p)
    if num == 0 and den == 0:
        return 0.0
    return num / (math.sqrt(_level_bracket(hermite_a(u), eta)) * math.sqrt(den))


def resonance_residual(u1, u2, eta):
    """Cov^2 - Var Var + (1+eta^2)/512 (u2^4 - 4u2^2 - u1^4 + 4u1^2)^2 (identically zero)."""
    a1, a2 = hermite_a(u1), hermite_a(u2)
    cov = 2 * a1 * a2 - (a1 + a2) / 4 + (3 + eta**2) / 64
    v1 = _level_bracket(a1, eta)
    v2 = _level_bracket(a2, eta)
    poly = -(u1**4) + 4 * u1**2 + u2**4 - 4 * u2**2
    return cov**2 - v1 * v2 + (1 + eta**2) / 512 * poly**2


def resonant_levels(u1: float) -> list[float]:
    """All real u2 with u2^4 - 4 u2^2 = u1^4 - 4 u1^2, sorted and deduplicated.

    The quartic factors as (u2^2 - u1^2)(u2^2 - (4 - u1^2)).
    """
    u1 = abs(float(u1))
    roots = [-u1, u1]
    other = 4 - u1 * u1
    if other >= 0:
        r = math.sqrt(other)
        roots += [-r, r]
    out: list[float] = []
    for r in sorted(roots):
        if not out or r - out[-1] > DEDUP_TOL:
            out.append(r + 0.0)
    return out


def corr3d(I4: float) -> float:
    if not (0.2 - DEDUP_TOL <= I4 <= 1 / 3 + DEDUP_TOL):
        raise ArwError(f"I4={I4} is outside the static range [1/5, 1/3]")
    return 16 / math.sqrt(405 * I4 + 175)


def var_A3d(n: int, N: int) -> float:
    return 32 / 375 * n / N**2


def var_M3d(n: int, N: int, I4: float, A: float) -> float:
    """Uses the normalised I4, so the I4 term carries the A^2 factor too."""
    return math.pi**2 / 9600 * n / N**2 * (81 * I4 + 35) * A**2


def cov3d(n: int, N: int, A: float) -> float:
    return n / N**2 * 8 * math.pi * A / 375


@dataclass(frozen=True)
class CorrelationTables:
    labels: list[str]
    asymptotic: np.ndarray
    partial: np.ndarray


def correlation_matrices(eta: float, static_audit=None, levels=(0.0, 1.0, 2.0), *,
                         I4: float | None = None, I4p: float | None = None) -> CorrelationTables:
    """Both 6x6 tables for (L^0, L^u1, L^u2, Z(C), Z(C'), Z(C'')).

    The static curve C' supplies (I4, I4'), either through its audit or
    explicitly.
    """
    if static_audit is not None:
        _check_static(static_audit)
        I4, I4p = static_audit.I4, static_audit.I4prime
    if I4 is None or I4p is None:
        raise ArwError("the static curve's I4 and I4' are required")
    levels = list(levels)
    if len(levels) != 3 or levels[0] != 0 or 0 in levels[1:]:
        raise ArwError("levels must be (0, u1, u2) with u1, u2 nonzero")
    _, u1, u2 = levels
    f0 = corr_nodal_static(eta, I4, I4p)
    labels = ["L0", f"L{u1:g}", f"L{u2:g}", "Z(C)", "Z(C')", "Z(C'')"]
    A = np.eye(6)
    A[2, 1] = 1.0
    A[4, 0] = f0
    A[5, 0] = 1.0
    A[5, 4] = f0
    P = np.eye(6)
    P[1, 0] = partial_corr_levels(0, u1, eta)
    P[2, 0] = partial_corr_levels(0, u2, eta)
    P[2, 1] = partial_corr_levels(u1, u2, eta)
    P[4, 0] = f0
    P[4, 1] = partial_corr_level_static(u1, eta, I4, I4p)
    P[4, 2] = partial_corr_level_static(u2, eta, I4, I4p)
    P[5, 0] = 1.0
    P[5, 1] = P[1, 0]
    P[5, 2] = P[2, 0]
    P[5, 4] = f0
    A = np.tril(A) + np.tril(A, -1).T
    P = np.tril(P) + np.tril(P, -1).T
    return CorrelationTables(labels, A, P)
