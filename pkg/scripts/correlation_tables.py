#!/usr/bin/env python3
"""Print the asymptotic and partial correlation tables for a static curve over several eta."""

from __future__ import annotations

import argparse

from arw import theory
from arw.curves import audit, build_curve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--curve", default="kfold:k=4,r=0.2,eps=0.05")
    ap.add_argument("--eta", type=float, nargs="+", default=[-1.0, -0.5, 0.0, 0.5, 1.0])
    ap.add_argument("--levels", type=float, nargs=3, default=[0.0, 1.0, 2.0])
    a = ap.parse_args()

    au = audit(build_curve(a.curve))
    print(f"{a.curve}: {au.classification}, I4={au.I4:.6f}, I4'={au.I4prime:.6f}")
    for eta in a.eta:
        t = theory.correlation_matrices(eta, au, a.levels)
        print(f"\neta = {eta:g}   f = {theory.corr_nodal_static(eta, au.I4, au.I4prime):.6f}")
        for name, mat in (("asymptotic", t.asymptotic), ("partial", t.partial)):
            print(name)
            print(" " * 8 + " ".join(f"{lab:>8}" for lab in t.labels))
            for lab, row in zip(t.labels, mat):
                print(f"{lab:<8}" + " ".join(f"{v:>8.4f}" for v in row))


if __name__ == "__main__":
    main()
