"""Monte Carlo ensembles, correlation estimates and theory comparison."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, theory
from .chaos import ChaosModel, level_tag, x_values
from .curves import audit, build_curve, parse_descriptor
from .errors import ArwError, ConfigInvalid, DegenerateVariance, MismatchedManifest
from .field import draw_coefficients, restrict_to_curve, synthesize_grid
from .lattice import SEPARATION_CONSTANT, enumerate_points, mu4
from .levelset import crossings, level_length, nodal_area_3d
from .surfaces import build_surface, parse_surface

CHUNK_ROWS = {"chaos": 4096, "field": 50}
BATCHES = 20
FINITE_N_C = 2.0
DROPPED_REMAINDERS = "dominant-term chaos: o_P(1) and R1 remainders omitted"


@dataclass
class EnsembleConfig:
    n: int
    mode: str = "chaos"
    samples: int = 1000
    dim: int = 2
    grid: int = 256
    levels: list[float] = field(default_factory=lambda: [0.0, 1.0, 2.0])
    curves: list[str] = field(default_factory=list)
    surfaces: list[str] = field(default_factory=list)
    seed: int = 0
    nodes: int = 4096
    wick: bool = True

    def validate(self) -> "EnsembleConfig":
        if self.mode not in CHUNK_ROWS:
            raise ConfigInvalid(f"mode must be 'field' or 'chaos', got {self.mode!r}")
        if self.dim not in (2, 3):
            raise ConfigInvalid("dim must be 2 or 3")
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigInvalid("n must be a positive integer")
        if self.samples < 1:
            raise ConfigInvalid("samples must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed must be a u64")
        if self.dim == 3 and self.curves:
            raise ConfigInvalid("curves need dim 2")
        if self.dim == 2 and self.surfaces:
            raise ConfigInvalid("surfaces need dim 3")
        try:
            for c in self.curves:
                parse_descriptor(c)
            for s in self.surfaces:
                parse_surface(s)
        except ArwError as exc:
            raise ConfigInvalid(str(exc)) from exc
        if self.mode == "field" and self.grid < 4 * math.ceil(math.sqrt(self.n)):
            raise ConfigInvalid(f"grid {self.grid} is below 4 cells per wavelength")
        return self

    @property
    def curve_ids(self) -> dict[str, str]:
        return {f"c{i + 1}": d for i, d in enumerate(self.curves)}

    @property
    def surface_ids(self) -> dict[str, str]:
        return {f"s{i + 1}": d for i, d in enumerate(self.surfaces)}

    def manifest(self) -> dict:
        m = asdict(self)
        m["curve_ids"] = self.curve_ids
        m["surface_ids"] = self.surface_ids
        m["chunk_rows"] = CHUNK_ROWS[self.mode]
        m["code_version"] = __version__
        m["remainders"] = DROPPED_REMAINDERS
        m["tolerance_c"] = FINITE_N_C
        m["separation_constant"] = SEPARATION_CONSTANT
        return m

    @classmethod
    def from_manifest(cls, m: dict) -> "EnsembleConfig":
        keys = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in m.items() if k in keys}).validate()


@dataclass
class EnsembleTable:
    manifest: dict
    data: dict[str, np.ndarray]

    @property
    def columns(self) -> list[str]:
        return list(self.data)

    def __len__(self) -> int:
        return len(next(iter(self.data.values())))

    def __getitem__(self, name: str) -> np.ndarray:
        if name not in self.data:
            raise ArwError(f"no column {name!r}; have {self.columns}")
        return self.data[name]


# -- ensemble generation -----------------------------------------------------

_WORKER_CACHE: dict[str, tuple] = {}


def _context(cfg: EnsembleConfig):
    key = json.dumps(asdict(cfg), sort_keys=True)
    if key not in _WORKER_CACHE:
        fs = enumerate_points(cfg.n, cfg.dim)
        if fs.count == 0:
            raise ConfigInvalid(f"no lattice points of norm {cfg.n} in dim {cfg.dim}")
        curves = {cid: build_curve(d, cfg.nodes) for cid, d in cfg.curve_ids.items()}
        surfaces = {sid: build_surface(d) for sid, d in cfg.surface_ids.items()}
        model = ChaosModel(fs, cfg.levels if cfg.dim == 2 else [], curves, surfaces, wick=cfg.wick)
        _WORKER_CACHE.clear()
        _WORKER_CACHE[key] = (fs, curves, model)
    return _WORKER_CACHE[key]


def _run_chunk(args) -> dict[str, np.ndarray]:
    cfg_dict, start, stop = args
    cfg = EnsembleConfig(**cfg_dict)
    fs, curves, model = _context(cfg)
    idx = np.arange(start, stop)
    draws = [draw_coefficients(fs, cfg.seed, int(i)) for i in idx]
    X = np.stack([x_values(d.coeffs) for d in draws])
    out: dict[str, np.ndarray] = {"sample_idx": idx}
    if cfg.mode == "field":
        geo: dict[str, list] = {}
        for d in draws:
            sample = synthesize_grid(d, cfg.grid)
            if cfg.dim == 2:
                for u in cfg.levels:
                    m = level_length(sample, u)
                    geo.setdefault(f"length_u{level_tag(u)}", []).append(m.length)
                    geo.setdefault(f"refine_u{level_tag(u)}", []).append(m.refinement_delta)
                for cid, curve in curves.items():
                    cc = crossings(restrict_to_curve(d, curve, cid))
                    geo.setdefault(f"crossings_{cid}", []).append(cc.count)
            else:
                for u in cfg.levels:
                    geo.setdefault(f"area_u{level_tag(u)}", []).append(nodal_area_3d(sample, u))
        for k, v in geo.items():
            out[k] = np.asarray(v)
    out.update(model.evaluate(X))
    return out


def worker_count() -> int:
    env = os.environ.get("ARW_THREADS")
    if env:
        try:
            k = int(env)
        except ValueError:
            raise ConfigInvalid(f"ARW_THREADS must be an integer, got {env!r}") from None
        if k < 1:
            raise ConfigInvalid("ARW_THREADS must be >= 1")
        return k
    return os.cpu_count() or 1


def run_ensemble(cfg: EnsembleConfig, threads: int | None = None) -> EnsembleTable:
    """Generate the table; rows depend only on (seed, sample index)."""
    cfg.validate()
    _context(cfg)  # fail fast on bad geometry before spawning workers
    rows = CHUNK_ROWS[cfg.mode]
    jobs = [(asdict(cfg), s, min(s + rows, cfg.samples)) for s in range(0, cfg.samples, rows)]
    threads = worker_count() if threads is None else threads
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    data = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    return EnsembleTable(cfg.manifest(), data)


# -- CSV / manifest I/O ------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    return repr(float(v))


def write_table(table: EnsembleTable, out_dir, extra_manifest: dict | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = table.columns
    with open(out / "ensemble.csv", "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        arrays = [table.data[c] for c in cols]
        for i in range(len(table)):
            fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")
    manifest = dict(table.manifest)
    manifest.update(extra_manifest or {})
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def read_table(in_dir) -> EnsembleTable:
    d = Path(in_dir)
    try:
        manifest = json.loads((d / "manifest.json").read_text())
        lines = (d / "ensemble.csv").read_text().splitlines()
    except FileNotFoundError as exc:
        raise ArwError(f"missing run file: {exc.filename}") from None
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    data = {}
    for j, name in enumerate(header):
        vals = [r[j] for r in rows]
        if name == "sample_idx" or name.startswith("crossings_"):
            data[name] = np.array([int(v) for v in vals], dtype=np.int64)
        else:
            data[name] = np.array([float(v) for v in vals])
    return EnsembleTable(manifest, data)


# -- estimation --------------------------------------------------------------

@dataclass(frozen=True)
class CorrEstimate:
    pair: tuple[str, str]
    rho: float
    rho_partial: float | None
    stderr: float
    conditioning: str | None = None


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc, yc = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(xc @ xc), math.sqrt(yc @ yc)
    if sx == 0 or sy == 0:
        raise DegenerateVariance("zero variance column")
    return float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))


def residuals(y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Least-squares residual of ``y`` on ``[1, z]``."""
    Z = np.column_stack([np.ones_like(z), z])
    beta, *_ = np.linalg.lstsq(Z, y, rcond=None)
    return y - Z @ beta


def _partial(x, y, z) -> float | None:
    rx, ry = residuals(x, z), residuals(y, z)
    if rx.var() <= 1e-12 or ry.var() <= 1e-12:
        return None
    return _pearson(rx, ry)


def batch_stderr(stat, *cols: np.ndarray, batches: int = BATCHES) -> float:
    """Batch-means standard error of ``stat(*cols)`` over contiguous batches."""
    m = len(cols[0])
    edges = np.linspace(0, m, batches + 1).astype(int)
    vals = []
    for a, b in zip(edges[:-1], edges[1:]):
        v = stat(*(c[a:b] for c in cols))
        if v is not None:
            vals.append(v)
    if len(vals) < 2:
        return math.nan
    return float(np.std(vals, ddof=1) / math.sqrt(len(vals)))


def correlate(table, x: str, y: str, conditioning: str | None = None) -> CorrEstimate:
    cx = np.asarray(table[x], dtype=float)
    cy = np.asarray(table[y], dtype=float)
    if len(cx) < 100:
        raise ArwError("correlation estimates need at least 100 rows")
    rho = _pearson(cx, cy)
    if conditioning is None:
        return CorrEstimate((x, y), rho, None, batch_stderr(_pearson, cx, cy))
    cz = np.asarray(table[conditioning], dtype=float)
    part = _partial(cx, cy, cz)
    se = batch_stderr(_partial, cx, cy, cz) if part is not None else math.nan
    return CorrEstimate((x, y), rho, part, se, conditioning)


# -- comparison with theory --------------------------------------------------

def _cov(x, y) -> float:
    return float(np.mean((x - x.mean()) * (y - y.mean())))


def _var(x) -> float:
    return float(np.var(x))


@dataclass(frozen=True)
class Prediction:
    quantity: str
    predicted: float
    rule: str  # "min", "maxabs", "abs", "rel"
    tol: float
    stderr_mult: float = 0.0
    note: str = ""
    manifest: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    measured: float
    predicted: float
    tolerance: float
    passed: bool
    stderr: float
    note: str


def measure(table, quantity: str) -> tuple[float, float]:
    """Evaluate ``kind:args`` quantities with a batch-means standard error.

    Kinds: ``corr:X:Y``, ``pcorr:X:Y:Z``, ``mean:X``, ``var:X``, ``var2:X``
    (variance of X^2), ``cov:X:Y``, ``scaled:K:kind:args`` (measured times K),
    ``even:X,Y,...`` (fraction of rows where every listed column is even).
    """
    kind, _, rest = quantity.partition(":")
    args = rest.split(":")
    if kind == "scaled":
        k = float(args[0])
        v, se = measure(table, ":".join(args[1:]))
        return k * v, abs(k) * se
    if kind == "corr":
        est = correlate(table, args[0], args[1])
        return est.rho, est.stderr
    if kind == "pcorr":
        est = correlate(table, args[0], args[1], args[2])
        if est.rho_partial is None:
            raise DegenerateVariance(f"residual variance vanishes for {quantity}")
        return est.rho_partial, est.stderr
    if kind == "even":
        names = args[0].split(",")
        ok = np.all([np.asarray(table[c]) % 2 == 0 for c in names], axis=0).astype(float)
        return float(ok.mean()), 0.0
    cols = [np.asarray(table[a], dtype=float) for a in args]
    fn = {
        "mean": lambda x: float(np.mean(x)),
        "var": _var,
        "var2": lambda x: _var(x * x),
        "cov": _cov,
    }.get(kind)
    if fn is None:
        raise ArwError(f"unknown quantity kind {kind!r}")
    return fn(*cols), batch_stderr(fn, *cols)


def _judge(p: Prediction, value: float, se: float) -> tuple[bool, float]:
    allowance = p.tol + p.stderr_mult * (0.0 if math.isnan(se) else se)
    if p.rule == "min":
        return value >= p.predicted - allowance, allowance
    if p.rule == "maxabs":
        return abs(value) <= p.predicted + allowance, allowance
    if p.rule == "abs":
        return abs(value - p.predicted) <= allowance, allowance
    if p.rule == "rel":
        return abs(value - p.predicted) <= allowance * abs(p.predicted), allowance
    if p.rule == "eq":
        return value == p.predicted, 0.0
    raise ArwError(f"unknown rule {p.rule!r}")


def compare(table, predictions: list[Prediction]) -> list[ReportRow]:
    rows = []
    for p in predictions:
        for key, val in p.manifest.items():
            if table.manifest.get(key) != val:
                raise MismatchedManifest(
                    f"{p.quantity}: manifest {key}={table.manifest.get(key)!r}, prediction {val!r}"
                )
        value, se = measure(table, p.quantity)
        ok, tol = _judge(p, value, se)
        rows.append(ReportRow(p.quantity, value, p.predicted, tol, bool(ok), se, p.note))
    return rows


def standard_predictions(manifest: dict) -> list[Prediction]:
    """Acceptance comparisons appropriate to a run manifest."""
    n, dim = manifest["n"], manifest["dim"]
    fs = enumerate_points(n, dim)
    N = fs.count
    key = {"n": n, "mode": manifest["mode"]}
    preds: list[Prediction] = []
    if dim != 2:
        return preds
    eta = mu4(fs)
    proxy = f"finite-n proxy eta = mu4 = {eta:.6g}"
    tags = {float(u): level_tag(float(u)) for u in manifest["levels"]}
    curves = {cid: build_curve(d, manifest.get("nodes", 4096)) for cid, d in manifest["curve_ids"].items()}
    audits = {cid: audit(c) for cid, c in curves.items()}
    if manifest["mode"] == "chaos":
        if 0.0 in tags and 2.0 in tags:
            preds.append(Prediction("corr:L4_u0:L4_u2", theory.partial_corr_levels(0, 2, eta), "min",
                                    0.05, note=proxy, manifest=key))
        if 0.0 in tags and 1.0 in tags:
            preds.append(Prediction("corr:L4_u0:L4_u1", theory.partial_corr_levels(0, 1, eta), "abs",
                                    0.05, 3.0, note=proxy, manifest=key))
        preds.append(Prediction("var2:W1", 2.0, "rel", 0.05, manifest=key))
        for cid, au in audits.items():
            if au.classification == "doubly_static" and 0.0 in tags:
                L = curves[cid].length
                pref_l = 0.5 * math.sqrt(theory.energy(n) / 2) / N
                pref_z = math.sqrt(2 * n) / (4 * N) * L
                bracket = (1 + 2 * eta * au.I4prime + eta**2) / 16
                # the two quadratic forms are proportional sample by sample
                preds.append(Prediction(f"corr:L4_u0:Z4dd_{cid}", 0.99, "min", 0.0,
                                        manifest=key))
                k = 1.0 / (pref_l * pref_z * bracket)
                preds.append(Prediction(f"scaled:{k!r}:cov:L4_u0:Z4dd_{cid}", 1.0, "rel", 0.05,
                                        note=proxy, manifest=key))
                break
    else:
        if 1.0 in tags and 2.0 in tags:
            preds.append(Prediction("corr:length_u1:length_u2", 0.8, "min", 0.0, manifest=key,
                                    note="asymptotic value 1"))
        if 0.0 in tags and 1.0 in tags:
            preds.append(Prediction("corr:length_u0:length_u1", 0.35, "maxabs", 0.0, manifest=key,
                                    note="asymptotic value 0"))
        if 1.0 in tags:
            k = N / theory.energy(n)
            preds.append(Prediction(f"scaled:{k!r}:var:length_u1", math.exp(-1) / 32, "rel", 0.35,
                                    manifest=key, note="N=%d is far from asymptotic" % N))
        if curves:
            names = ",".join(f"crossings_{cid}" for cid in curves)
            preds.append(Prediction(f"even:{names}", 1.0, "eq", 0.0, manifest=key))
    return preds


def report_dicts(rows: list[ReportRow]) -> list[dict]:
    return [asdict(r) for r in rows]
