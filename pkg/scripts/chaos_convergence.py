#!/usr/bin/env python3
"""Chaos-level ensembles over a ladder of energies.

For each n the script runs a Monte Carlo ensemble of the dominant-chaos
columns and prints, next to each measurement, both the asymptotic
prediction and the exact finite-N value of the same quadratic form.  The
gap between the two columns is the O(1/N) finite-size bias.
"""

from __future__ import annotations

import argparse
import math

import numpy as np

from arw import theory
from arw.chaos import ChaosModel, hermite_a, level_tag
from arw.curves import audit, build_curve
from arw.lattice import enumerate_points, mu4
from arw.mc import EnsembleConfig, measure, run_ensemble


def exact_cov(f, g) -> float:
    """Cov of two Wick-ordered forms in x = |a|^2 - 1 (E h^2 = 4 on the diagonal)."""
    C, D = f.C, g.C
    return f.prefactor * g.prefactor * (2 * np.sum(C * D) + 2 * np.sum(np.diag(C) * np.diag(D)))


def bracket(u1: float, u2: float, eta: float) -> float:
    a1, a2 = hermite_a(u1), hermite_a(u2)
    return 2 * a1 * a2 - (a1 + a2) / 4 + (3 + eta**2) / 64


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[1105, 32045, 801125])
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--curve", default="circle:r=0.2")
    ap.add_argument("--seed", type=int, default=1)
    a = ap.parse_args()

    curve = build_curve(a.curve)
    au = audit(curve)
    print(f"curve {a.curve}: {au.classification}, I4={au.I4:.6f}, I4'={au.I4prime:.6f}")
    hdr = f"{'n':>8} {'N':>5} {'quantity':<22} {'measured':>10} {'stderr':>8} {'exact N':>10} {'limit':>10}"
    print(hdr)
    for n in a.n:
        fs = enumerate_points(n, 2)
        N, eta = fs.count, mu4(fs)
        cfg = EnsembleConfig(n=n, mode="chaos", samples=a.samples, curves=[a.curve], seed=a.seed)
        table = run_ensemble(cfg)
        model = ChaosModel(fs, cfg.levels, {"c1": curve})
        rows = []
        v, se = measure(table, "var2:W1")
        rows.append(("Var(W1^2)", v, se, 2 + 12 / N, 2.0))
        for u1, u2 in ((0.0, 1.0), (0.0, 2.0)):
            f = model.forms[f"L4_u{level_tag(u1)}"]
            g = model.forms[f"L4_u{level_tag(u2)}"]
            exact = exact_cov(f, g) / math.sqrt(exact_cov(f, f) * exact_cov(g, g))
            v, se = measure(table, f"corr:L4_u{level_tag(u1)}:L4_u{level_tag(u2)}")
            rows.append((f"Corr(L0,L{u2:g})", v, se, exact, theory.partial_corr_levels(u1, u2, eta)))
            k = f.prefactor * g.prefactor * bracket(u1, u2, eta)
            v, se = measure(table, f"cov:L4_u{level_tag(u1)}:L4_u{level_tag(u2)}")
            rows.append((f"Cov(L0,L{u2:g})/bracket", v / k, se / abs(k), exact_cov(f, g) / k, 1.0))
        if au.is_static:
            v, se = measure(table, "corr:L4_u0:Z4_c1")
            rows.append(("Corr(L0,Z4)", v, se, math.nan,
                         theory.corr_nodal_static(eta, au.I4, au.I4prime)))
        for name, v, se, ex, lim in rows:
            print(f"{n:>8} {N:>5} {name:<22} {v:>10.5f} {se:>8.5f} {ex:>10.5f} {lim:>10.5f}")


if __name__ == "__main__":
    main()
