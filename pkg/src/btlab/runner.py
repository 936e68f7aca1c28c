"""Experiment orchestration: execute checks, manage the cache, write reports.

A run executes every requested check against the configured symbols and
levels, records one outcome per check, and writes three artifacts into the
output directory:

    report.json   -- the full structured RunReport
    tables.csv    -- every convergence table as rows (check, m, value)
    plots/*.dat   -- one two-column gnuplot file per table

Exit codes: 0 all checks passed, 1 some check failed, 2 configuration
error, 3 internal error (the CLI maps exceptions to 2/3).
"""

from __future__ import annotations

import re
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from platform import python_version

import numpy as np

from . import __version__
from .cache import MatrixCache, symbol_hash
from .config import ExperimentConfig
from .errors import CacheCorruption
from .exact import QC
from .operators import OperatorMatrix, prequantum_geometric, toeplitz_exact
from .semiclassics import (
    EXACT_ZERO_TOL,
    ConvergenceTable,
    dirac_defect,
    loglog_slope,
    norm_defect,
    product_coefficients,
    sass_remainder,
    spectral_moment,
    moment_limit,
    tuynman_defect,
)
from .starproduct import FormalSeries, b_inverse, b_map, check_axioms, check_equivalence
from .symbols import (
    CanonicalSymbol,
    average,
    calibrate_hamiltonian_phase,
    laplacian,
    random_real_symbol,
    sphere_height,
    sup_norm,
)

NORM_CONTRACTION_TOL = 1e-9


class Assembler:
    """Cache-aware matrix factory with hit/assembly counters."""

    def __init__(self, cache: MatrixCache | None):
        self.cache = cache
        self.assemblies = 0
        self.cache_hits = 0
        self.cache_corruptions = 0
        self._memo: dict[tuple[str, str, int], OperatorMatrix] = {}
        self._lock = threading.Lock()

    def _get(self, f: CanonicalSymbol, m: int, kind: str, build) -> OperatorMatrix:
        key = (symbol_hash(f), kind, m)
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        mat = None
        if self.cache is not None:
            try:
                mat = self.cache.load(key[0], kind, m)
            except CacheCorruption as exc:
                print(f"warning: {exc}; recomputing", file=sys.stderr)
                with self._lock:
                    self.cache_corruptions += 1
        if mat is None:
            mat = build(f, m)
            with self._lock:
                self.assemblies += 1
            if self.cache is not None:
                self.cache.store(mat, key[0], kind)
        else:
            with self._lock:
                self.cache_hits += 1
        with self._lock:
            self._memo[key] = mat
        return mat

    def toeplitz(self, f: CanonicalSymbol, m: int) -> OperatorMatrix:
        return self._get(f, m, "toeplitz", toeplitz_exact)

    def prequantum(self, f: CanonicalSymbol, m: int) -> OperatorMatrix:
        return self._get(f, m, "prequantum", prequantum_geometric)


@dataclass
class CheckOutcome:
    name: str
    status: str
    tables: list[ConvergenceTable] = field(default_factory=list)
    details: dict = field(default_factory=dict)


@dataclass
class RunReport:
    experiment: str
    manifold: str
    seed: int
    m_list: list[int]
    calibration: dict
    versions: dict
    checks: dict[str, CheckOutcome]
    counters: dict
    timings: dict
    status: str

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "manifold": self.manifold,
            "seed": self.seed,
            "m_list": self.m_list,
            "calibration": self.calibration,
            "versions": self.versions,
            "counters": self.counters,
            "timings": self.timings,
            "status": self.status,
            "checks": {
                name: {
                    "status": out.status,
                    "details": out.details,
                    "tables": [_table_dict(t) for t in out.tables],
                }
                for name, out in self.checks.items()
            },
        }


def _table_dict(table: ConvergenceTable) -> dict:
    fit = None
    if table.fit is not None:
        fit = {
            "slope": table.fit.slope,
            "intercept": table.fit.intercept,
            "residual": table.fit.residual,
            "n_used": table.fit.n_used,
            "exact_identity": table.fit.exact_identity,
        }
    return {"name": table.name, "records": [[m, v] for m, v in table.records], "fit": fit}


def _pairs(names: list[str]) -> list[tuple[str, str]]:
    if len(names) == 1:
        return [(names[0], names[0])]
    return [(names[i], names[(i + 1) % len(names)]) for i in range(len(names))]


def _sweep(name: str, m_list, fn, jobs: int) -> ConvergenceTable:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(fn, m_list))
    else:
        values = [fn(m) for m in m_list]
    return ConvergenceTable(name, list(zip(m_list, values)))


def _slope_ok(table: ConvergenceTable, threshold: float) -> bool:
    fit = loglog_slope(table)
    return fit.exact_identity or fit.slope <= threshold


def _check_norms(cfg: ExperimentConfig, ctx) -> CheckOutcome:
    tables, details, ok = [], {}, True
    for name, f in cfg.active_symbols():
        sup = sup_norm(f)
        table = _sweep(
            name, cfg.m_list, lambda m, f=f, s=sup: norm_defect(f, m, s, toeplitz=ctx.toeplitz), ctx.jobs
        )
        tables.append(table)
        defects = table.values()
        if any(d < -NORM_CONTRACTION_TOL for d in defects):
            ok = False
        details[name] = {
            "sup_norm": sup,
            "C_max_m_defect": max(m * d for m, d in table.records),
            "exact_identity": all(abs(d) <= EXACT_ZERO_TOL for d in defects),
        }
    return CheckOutcome("norms", "pass" if ok else "fail", tables, details)


def _check_dirac(cfg: ExperimentConfig, ctx) -> CheckOutcome:
    threshold = -1.0 + cfg.slope_window
    tables, details, ok = [], {}, True
    for na, nb in _pairs(cfg.active):
        f, g = cfg.symbols[na], cfg.symbols[nb]
        table = _sweep(
            f"{na}-{nb}", cfg.m_list, lambda m, f=f, g=g: dirac_defect(f, g, m, toeplitz=ctx.toeplitz), ctx.jobs
        )
        tables.append(table)
        if not _slope_ok(table, threshold):
            ok = False
        details[table.name] = {"slope": table.fit.slope, "threshold": threshold}
    return CheckOutcome("dirac", "pass" if ok else "fail", tables, details)


def _check_product(cfg: ExperimentConfig, ctx, order: int, check_name: str) -> CheckOutcome:
    threshold = -float(order) + order * cfg.slope_window
    tables, details, ok = [], {}, True
    for na, nb in _pairs(cfg.active):
        f, g = cfg.symbols[na], cfg.symbols[nb]
        coeffs = product_coefficients(f, g, order)
        table = _sweep(
            f"{na}-{nb}",
            cfg.m_list,
            lambda m, f=f, g=g, c=coeffs: sass_remainder(f, g, c, m, toeplitz=ctx.toeplitz),
            ctx.jobs,
        )
        tables.append(table)
        if not _slope_ok(table, threshold):
            ok = False
        details[table.name] = {
            "slope": table.fit.slope,
            "threshold": threshold,
            "K_max_scaled": max(m**order * v for m, v in table.records),
        }
    return CheckOutcome(check_name, "pass" if ok else "fail", tables, details)


def _check_trace(cfg: ExperimentConfig, ctx) -> CheckOutcome:
    tables, details, ok = [], {}, True
    tol = cfg.identity_tol
    for name, f in cfg.active_symbols():
        avg = float(average(f).re)
        records = []
        worst = 0.0
        for m in cfg.m_list:
            tr = float(np.trace(ctx.toeplitz(f, m).entries).real)
            records.append((m, tr))
            worst = max(worst, abs(tr - (m + 1) * avg))
        table = ConvergenceTable(name, records)
        tables.append(table)
        ms = np.array([m for m, _ in records], dtype=float)
        trs = np.array([v for _, v in records])
        tau0, tau1 = np.polyfit(ms, trs, 1)
        residual = float(np.max(np.abs(tau0 * ms + tau1 - trs)))
        sym_ok = worst <= tol and residual <= tol and abs(tau0 - avg) <= tol and abs(tau1 - avg) <= tol
        ok = ok and sym_ok
        details[name] = {
            "average": avg,
            "tau0": float(tau0),
            "tau1": float(tau1),
            "max_identity_defect": worst,
            "fit_residual": residual,
        }
    return CheckOutcome("trace", "pass" if ok else "fail", tables, details)


def _check_spectrum(cfg: ExperimentConfig, ctx) -> CheckOutcome:
    threshold = -1.0 + cfg.slope_window
    tables, details, ok = [], {}, True
    for name, f in cfg.active_symbols():
        for k in (1, 2, 3):
            limit = float(moment_limit(f, k).re)
            table = _sweep(
                f"{name}-k{k}",
                cfg.m_list,
                lambda m, f=f, k=k, L=limit: abs(spectral_moment(f, m, k, toeplitz=ctx.toeplitz) - L),
                ctx.jobs,
            )
            tables.append(table)
            if not _slope_ok(table, threshold):
                ok = False
            details[table.name] = {
                "limit": limit,
                "slope": table.fit.slope,
                "exact_identity": table.fit.exact_identity,
            }
    return CheckOutcome("spectrum", "pass" if ok else "fail", tables, details)


def _check_tuynman(cfg: ExperimentConfig, ctx) -> CheckOutcome:
    tables, details, ok = [], {}, True
    for name, f in cfg.active_symbols():
        table = _sweep(
            name,
            cfg.m_list,
            lambda m, f=f: tuynman_defect(f, m, toeplitz=ctx.toeplitz, prequantum=ctx.prequantum),
            ctx.jobs,
        )
        tables.append(table)
        worst = max(table.values())
        if worst > cfg.identity_tol:
            ok = False
        details[name] = {"max_defect": worst}
    return CheckOutcome("tuynman", "pass" if ok else "fail", tables, details)


def _random_pool(cfg: ExperimentConfig, count: int) -> list[CanonicalSymbol]:
    return [random_real_symbol(cfg.seed * 1000 + i, 2) for i in range(count)]


def _check_staraxioms(cfg: ExperimentConfig, ctx) -> CheckOutcome:
    details, ok = {}, True
    pool = [f for _, f in cfg.active_symbols()] + _random_pool(cfg, 6)
    for i in range(5):
        f, g, h = pool[i % len(pool)], pool[(i + 1) % len(pool)], pool[(i + 2) % len(pool)]
        rep = check_axioms(f, g, h)
        details[f"triple{i}"] = {
            "unit": rep.unit_ok,
            "parity": rep.parity_ok,
            "assoc_order1": rep.assoc_order1_ok,
            "trace_antisym": rep.trace_antisym_ok,
        }
        ok = ok and rep.all_ok
    return CheckOutcome("staraxioms", "pass" if ok else "fail", [], details)


def _check_equivalence(cfg: ExperimentConfig, ctx) -> CheckOutcome:
    details, ok = {}, True
    pool = [f for _, f in cfg.active_symbols()] + _random_pool(cfg, 5)
    for i in range(5):
        f, g = pool[i % len(pool)], pool[(i + 1) % len(pool)]
        defect_zero = check_equivalence(f, g).is_zero
        series = FormalSeries.of(f, 2)
        roundtrip = b_inverse(b_map(series)) == series
        details[f"pair{i}"] = {"nu1_defect_zero": defect_zero, "b_roundtrip": roundtrip}
        ok = ok and defect_zero and roundtrip
    return CheckOutcome("equivalence", "pass" if ok else "fail", [], details)


_CHECKS = {
    "norms": _check_norms,
    "dirac": _check_dirac,
    "product": lambda cfg, ctx: _check_product(cfg, ctx, 1, "product"),
    "sass2": lambda cfg, ctx: _check_product(cfg, ctx, 2, "sass2"),
    "trace": _check_trace,
    "spectrum": _check_spectrum,
    "tuynman": _check_tuynman,
    "staraxioms": _check_staraxioms,
    "equivalence": _check_equivalence,
}


def calibrate_laplacian_coeff(identity_tol: float = 1e-10) -> Fraction:
    """Pin the Laplacian normalization against the quantization identity.

    Tries candidate coefficients c in {1, 2, 4} for Delta_c = (c/2)*Delta
    and returns the one for which Q_f = i T_{f - Delta_c f/(2m)} holds at
    m = 2 on the height symbol.  Raises if none matches.
    """
    f = sphere_height()
    m = 2
    q = prequantum_geometric(f, m).entries
    for c in (Fraction(1), Fraction(2), Fraction(4)):
        rhs = toeplitz_exact(f - laplacian(f).scale(c / 2 * Fraction(1, 2 * m)), m)
        if float(np.max(np.abs(q - 1j * rhs.entries))) <= identity_tol:
            return c
    raise RuntimeError("no candidate Laplacian coefficient satisfies the quantization identity")


class _Context:
    def __init__(self, assembler: Assembler, jobs: int):
        self.assembler = assembler
        self.jobs = jobs
        self.toeplitz = assembler.toeplitz
        self.prequantum = assembler.prequantum


def execute(cfg: ExperimentConfig, jobs: int | None = None, cache: MatrixCache | None = None) -> RunReport:
    assembler = Assembler(cache)
    ctx = _Context(assembler, jobs if jobs is not None else len(cfg.m_list))
    phase = calibrate_hamiltonian_phase(cfg.seed)
    calibration = {
        "poisson_phase": "-i" if phase == QC(0, -1) else "+i",
        "hamiltonian_formula": "X^z = phase * (1+|z|^2)^2 df/dzbar",
        "laplacian_coeff": float(calibrate_laplacian_coeff(cfg.identity_tol)),
    }
    checks: dict[str, CheckOutcome] = {}
    timings: dict[str, float] = {}
    for name in cfg.checks:
        t0 = time.perf_counter()
        checks[name] = _CHECKS[name](cfg, ctx)
        timings[name] = time.perf_counter() - t0
    status = "pass" if all(out.status == "pass" for out in checks.values()) else "fail"
    return RunReport(
        experiment=cfg.name,
        manifold=cfg.manifold,
        seed=cfg.seed,
        m_list=list(cfg.m_list),
        calibration=calibration,
        versions={"btlab": __version__, "numpy": np.__version__, "python": python_version()},
        checks=checks,
        counters={
            "assemblies": assembler.assemblies,
            "cache_hits": assembler.cache_hits,
            "cache_corruptions": assembler.cache_corruptions,
        },
        timings=timings,
        status=status,
    )


def _safe_label(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", label)


def write_report(report: RunReport, outdir: Path) -> None:
    import json

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")

    rows = []
    for check_name, outcome in report.checks.items():
        for table in outcome.tables:
            label = f"{check_name}:{table.name}"
            for m, v in table.records:
                rows.append((label, m, v))
    rows.sort(key=lambda r: (r[0], r[1]))
    csv_lines = ["check,m,value"] + [f"{label},{m},{v:.17g}" for label, m, v in rows]
    (outdir / "tables.csv").write_text("\n".join(csv_lines) + "\n")

    plots = outdir / "plots"
    plots.mkdir(exist_ok=True)
    for check_name, outcome in report.checks.items():
        for table in outcome.tables:
            label = _safe_label(f"{check_name}_{table.name}")
            lines = [f"# {check_name}:{table.name}", "# m value"]
            lines += [f"{m} {v:.17g}" for m, v in table.records]
            (plots / f"{label}.dat").write_text("\n".join(lines) + "\n")


def run(
    cfg: ExperimentConfig,
    jobs: int | None = None,
    cache_root: Path | None = None,
    out: Path | None = None,
) -> tuple[RunReport, int]:
    cache = MatrixCache(cache_root) if cache_root is not None else MatrixCache()
    report = execute(cfg, jobs=jobs, cache=cache)
    write_report(report, out if out is not None else cfg.output)
    return report, 0 if report.status == "pass" else 1
