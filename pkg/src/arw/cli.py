"""Command-line entry point ``arw``.

Exit codes: 0 success, 1 validation error, 2 failed theory comparison.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, theory
from .curves import audit, build_curve
from .errors import ArwError, ConfigInvalid
from .field import draw_coefficients, dump_field_csv, synthesize_grid
from .lattice import enumerate_points, is_delta_separated, summarize
from .mc import (EnsembleConfig, compare, read_table, report_dicts, run_ensemble,
                 standard_predictions, write_table)
from .surfaces import audit_surface, build_surface


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _clean(obj):
    """Make ``obj`` strict-JSON: numpy scalars to Python, NaN/inf to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _emit(obj, as_json: bool, out=None) -> None:
    out = out or sys.stdout
    obj = _clean(obj)
    if as_json:
        out.write(json.dumps(obj, allow_nan=False) + "\n")
        return
    for k, v in obj.items():
        out.write(f"{k}: {v}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigInvalid(f"expected comma-separated numbers, got {text!r}") from None


# -- subcommands -------------------------------------------------------------

def cmd_lattice(a) -> int:
    fs = enumerate_points(a.n, a.dim)
    if fs.count == 0:
        raise ArwError(f"{a.n} is not a sum of {a.dim} squares")
    s = summarize(fs)
    out = {"n": a.n, "dim": a.dim, "count": s.n_count, "energy": s.energy, "mu4": s.mu4,
           "min_gap": s.min_gap, "admissible3d": s.admissible3d if a.dim == 3 else None}
    if a.delta is not None:
        out["delta_separated"] = is_delta_separated(fs, a.delta)
    if a.points:
        out["points"] = fs.points.tolist()
    _emit(out, a.json)
    return 0


def cmd_curve_audit(a) -> int:
    curve = build_curve(a.spec, a.quad_nodes)
    au = audit(curve)
    out = asdict(au)
    out["closure_error"] = curve.closure_error()
    _emit(out, a.json)
    return 0


def cmd_surface_audit(a) -> int:
    s = build_surface(a.spec)
    au = audit_surface(s, a.kmax)
    out = {"area": au.area, "I2": au.I2, "I4": au.I4, "Ik": au.Ik,
           "second_moments": au.second_moments, "classification": au.classification}
    _emit(out, a.json)
    return 0


def cmd_theory_table(a) -> int:
    levels = _floats(a.levels)
    if a.curve:
        au = audit(build_curve(a.curve))
        tables = theory.correlation_matrices(a.eta, au, levels)
        I4, I4p = au.I4, au.I4prime
    else:
        if a.i4 is None or a.i4p is None:
            raise ConfigInvalid("give --curve or both --i4 and --i4p")
        I4, I4p = a.i4, a.i4p
        tables = theory.correlation_matrices(a.eta, None, levels, I4=I4, I4p=I4p)
    out = {
        "eta": a.eta, "I4": I4, "I4prime": I4p, "levels": levels,
        "f": theory.corr_nodal_static(a.eta, I4, I4p),
        "labels": tables.labels,
        "asymptotic": tables.asymptotic, "partial": tables.partial,
    }
    if a.json:
        _emit(out, True)
    else:
        sys.stdout.write(f"f = {out['f']!r}\n")
        for name in ("asymptotic", "partial"):
            sys.stdout.write(f"{name}:\n")
            mat = getattr(tables, name)
            for lab, row in zip(tables.labels, mat):
                sys.stdout.write(f"  {lab:7s} " + " ".join(f"{v:8.5f}" for v in row) + "\n")
    return 0


def cmd_resonance(a) -> int:
    roots = theory.resonant_levels(a.u1)
    if a.json:
        _emit({"u1": a.u1, "levels": roots}, True)
    else:
        sys.stdout.write(", ".join(f"{r:g}" for r in roots) + "\n")
    return 0


_SIM_DEFAULTS = {"mode": "field", "samples": 500, "grid": 256, "levels": "0,1,2", "seed": 0,
                 "dim": 2, "nodes": 4096}


def _read_config(path) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise ConfigInvalid(f"config line without '=': {raw!r}")
        key = key.strip().replace("-", "_")
        val = val.strip()
        if key in ("curve", "surface"):
            out.setdefault(key, []).append(val)
        else:
            out[key] = val
    return out


def _sim_config(a) -> EnsembleConfig:
    if a.from_manifest:
        manifest = json.loads(Path(a.from_manifest).read_text())
        return EnsembleConfig.from_manifest(manifest)
    merged = dict(_SIM_DEFAULTS)
    if a.config:
        merged.update(_read_config(a.config))
    for key in ("n", "mode", "samples", "grid", "levels", "seed", "dim", "nodes"):
        v = getattr(a, key)
        if v is not None:
            merged[key] = v
    for key in ("curve", "surface"):
        if getattr(a, key):
            merged[key] = getattr(a, key)
    if "n" not in merged:
        raise ConfigInvalid("--n is required")
    try:
        cfg = EnsembleConfig(
            n=int(merged["n"]), mode=str(merged["mode"]), samples=int(merged["samples"]),
            dim=int(merged["dim"]), grid=int(merged["grid"]),
            levels=_floats(str(merged["levels"])), curves=list(merged.get("curve", [])),
            surfaces=list(merged.get("surface", [])), seed=int(merged["seed"]),
            nodes=int(merged["nodes"]), wick=not a.literal,
        )
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from None
    return cfg.validate()


def cmd_simulate(a) -> int:
    cfg = _sim_config(a)
    t0 = time.time()
    table = run_ensemble(cfg)
    cfg_json = json.dumps(asdict(cfg), sort_keys=True)
    extra = {
        "command_line": ["arw"] + list(a.argv),
        "config_hash": hashlib.sha256(cfg_json.encode()).hexdigest(),
        "module_versions": {"arw": __version__, "numpy": np.__version__},
        "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(t0)),
        "elapsed_s": round(time.time() - t0, 3),
    }
    out = write_table(table, a.out, extra)
    if a.dump_field:
        fs = enumerate_points(cfg.n, cfg.dim)
        sample = synthesize_grid(draw_coefficients(fs, cfg.seed, 0), cfg.grid)
        dump_field_csv(sample, a.dump_field, cfg.seed)
    sys.stdout.write(f"wrote {len(table)} rows to {out / 'ensemble.csv'}\n")
    return 0


def _print_report(rows, fmt: str) -> None:
    dicts = report_dicts(rows)
    if fmt == "json":
        sys.stdout.write(json.dumps(_clean(dicts), allow_nan=False) + "\n")
        return
    sys.stdout.write("quantity,measured,predicted,tolerance,stderr,pass,note\n")
    for d in dicts:
        sys.stdout.write(
            f"{d['quantity']},{d['measured']!r},{d['predicted']!r},{d['tolerance']!r},"
            f"{d['stderr']!r},{'PASS' if d['passed'] else 'FAIL'},{d['note']}\n"
        )


def cmd_chaos_verify(a) -> int:
    cfg = EnsembleConfig(n=a.n, mode="chaos", samples=a.samples, levels=_floats(a.levels),
                         curves=list(a.curve or []), seed=a.seed).validate()
    table = run_ensemble(cfg)
    rows = compare(table, standard_predictions(table.manifest))
    _print_report(rows, "json" if a.json else "csv")
    return 0 if all(r.passed for r in rows) else 2


def cmd_report(a) -> int:
    table = read_table(a.in_dir)
    rows = compare(table, standard_predictions(table.manifest))
    _print_report(rows, a.format)
    return 0 if all(r.passed for r in rows) else 2


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="arw", description="Arithmetic random wave laboratory")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    q = sub.add_parser("lattice", help="lattice points on a circle or sphere")
    q.add_argument("--dim", type=int, default=2)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--delta", type=float)
    q.add_argument("--points", action="store_true")
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=cmd_lattice)

    q = sub.add_parser("curve", help="reference curves")
    qs = q.add_subparsers(dest="action", parser_class=_Parser)
    r = qs.add_parser("audit")
    r.add_argument("--spec", required=True)
    r.add_argument("--quad-nodes", type=int, default=4096)
    r.add_argument("--json", action="store_true")
    r.set_defaults(fn=cmd_curve_audit)

    q = sub.add_parser("surface", help="reference surfaces")
    qs = q.add_subparsers(dest="action", parser_class=_Parser)
    r = qs.add_parser("audit")
    r.add_argument("--spec", required=True)
    r.add_argument("--kmax", type=int, default=8)
    r.add_argument("--json", action="store_true")
    r.set_defaults(fn=cmd_surface_audit)

    q = sub.add_parser("theory", help="closed-form predictions")
    qs = q.add_subparsers(dest="action", parser_class=_Parser)
    r = qs.add_parser("table")
    r.add_argument("--eta", type=float, required=True)
    r.add_argument("--levels", default="0,1,2")
    r.add_argument("--curve")
    r.add_argument("--i4", type=float)
    r.add_argument("--i4p", type=float)
    r.add_argument("--json", action="store_true")
    r.set_defaults(fn=cmd_theory_table)

    q = sub.add_parser("resonance", help="levels on the full correlation curve")
    q.add_argument("--u1", type=float, required=True)
    q.add_argument("--json", action="store_true")
    q.set_defaults(fn=cmd_resonance)

    q = sub.add_parser("simulate", help="run a Monte Carlo ensemble")
    q.add_argument("--n", type=int)
    q.add_argument("--dim", type=int)
    q.add_argument("--mode", choices=["field", "chaos"])
    q.add_argument("--samples", type=int)
    q.add_argument("--grid", type=int)
    q.add_argument("--levels")
    q.add_argument("--curve", action="append")
    q.add_argument("--surface", action="append")
    q.add_argument("--seed", type=int)
    q.add_argument("--nodes", type=int)
    q.add_argument("--literal", action="store_true",
                   help="evaluate chaos quadratic forms as written instead of Wick-ordered")
    q.add_argument("--config")
    q.add_argument("--from-manifest")
    q.add_argument("--dump-field")
    q.add_argument("--out", required=True)
    q.set_defaults(fn=cmd_simulate)

    q = sub.add_parser("chaos", help="chaos-level checks")
    qs = q.add_subparsers(dest="action", parser_class=_Parser)
    r = qs.add_parser("verify")
    r.add_argument("--n", type=int, default=1105)
    r.add_argument("--samples", type=int, default=200000)
    r.add_argument("--levels", default="0,1,2")
    r.add_argument("--curve", action="append")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--json", action="store_true")
    r.set_defaults(fn=cmd_chaos_verify)

    q = sub.add_parser("report", help="compare a run with theory")
    q.add_argument("--in", dest="in_dir", required=True)
    q.add_argument("--format", choices=["csv", "json"], default="csv")
    q.set_defaults(fn=cmd_report)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "fn"):
            raise UsageError(parser.format_help())
        args.argv = argv
        return args.fn(args)
    except UsageError as exc:
        sys.stderr.write(str(exc) + "\n")
        return 1
    except (ArwError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"arw: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
