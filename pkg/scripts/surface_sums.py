#!/usr/bin/env python3
"""Three-dimensional checks: lattice/surface sums and the area-intersection correlation.

For each admissible n the script prints the mixed lattice/surface sums and
the exact chaos-level variances of the nodal area and of the nodal
intersection length, divided by their asymptotic forms.
"""

from __future__ import annotations

import argparse
import math

import numpy as np

from arw import theory
from arw.chaos import ChaosModel
from arw.errors import ArwError
from arw.lattice import enumerate_points
from arw.surfaces import audit_surface, build_surface, mixed_lattice_surface_sums


def exact_cov(f, g) -> float:
    C, D = f.C, g.C
    return f.prefactor * g.prefactor * (2 * np.sum(C * D) + 2 * np.sum(np.diag(C) * np.diag(D)))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[1009, 3001, 10009])
    ap.add_argument("--surface", default="sphere:r=0.2")
    a = ap.parse_args()

    s = build_surface(a.surface, 64, 128)
    au = audit_surface(s)
    print(f"surface {a.surface}: {au.classification}, area={s.area:.6f}, I4={au.I4:.6f}")
    print(f"{'n':>6} {'N':>5} {'mean_I22':>9} {'s4':>8} {'VarA ratio':>11} {'VarM ratio':>11}"
          f" {'Cov ratio':>10} {'corr':>8} {'corr3d':>8}")
    for n in a.n:
        fs = enumerate_points(n, 3)
        N = fs.count
        sums = mixed_lattice_surface_sums(s, fs)
        m = ChaosModel(fs, [], surfaces={"s": s})
        va = exact_cov(m.forms["A4"], m.forms["A4"])
        vm = exact_cov(m.forms["M4_s"], m.forms["M4_s"])
        c = exact_cov(m.forms["A4"], m.forms["M4_s"])
        try:
            limit = theory.corr3d(au.I4)
        except ArwError:
            limit = math.nan
        print(f"{n:>6} {N:>5} {sums.mean_I22:>9.5f} {sums.s4:>8.5f}"
              f" {va / theory.var_A3d(n, N):>11.5f}"
              f" {vm / theory.var_M3d(n, N, au.I4, s.area):>11.5f}"
              f" {c / theory.cov3d(n, N, s.area):>10.5f} {c / math.sqrt(va * vm):>8.5f}"
              f" {limit:>8.5f}")


if __name__ == "__main__":
    main()
