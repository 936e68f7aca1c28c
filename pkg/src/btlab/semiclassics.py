"""Level sweeps quantifying the semiclassical laws of the quantization.

Every function here produces either a single defect at one level m or a
``ConvergenceTable`` over a sweep of levels; log-log slope fits turn the
O(m^-N) statements into checkable numbers.  Defects below EXACT_ZERO_TOL
are flagged as exact identities and never enter a fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DegenerateTable, UnknownCoefficientOrder
from .exact import QC
from .operators import (
    OperatorMatrix,
    commutator,
    hermitian_eigenvalues,
    operator_norm,
    prequantum_geometric,
    toeplitz_exact,
)
from .starproduct import c1
from .symbols import CanonicalSymbol, average, laplacian, poisson_bracket, sup_norm

DEFAULT_SWEEP = (8, 16, 32, 64, 128)
EXACT_ZERO_TOL = 1e-13


@dataclass
class FitResult:
    slope: float
    intercept: float
    residual: float
    n_used: int
    exact_identity: bool = False


@dataclass
class ConvergenceTable:
    name: str
    records: list[tuple[int, float]] = field(default_factory=list)
    fit: FitResult | None = None

    def __post_init__(self):
        ms = [m for m, _ in self.records]
        if ms != sorted(set(ms)):
            raise ValueError("levels must be strictly increasing")
        if not all(math.isfinite(v) for _, v in self.records):
            raise ValueError("table values must be finite")

    def values(self) -> list[float]:
        return [v for _, v in self.records]


def loglog_slope(table: ConvergenceTable) -> FitResult:
    """Least-squares slope of log(value) vs log(m) over the upper half of
    the sweep.  Near-zero values are excluded; if fewer than two survive the
    table is flagged as an exact identity (slope -inf)."""
    if len(table.records) < 4:
        raise DegenerateTable(f"{table.name}: need >= 4 records, have {len(table.records)}")
    upper = table.records[len(table.records) // 2 :]
    pts = [(m, v) for m, v in upper if v > EXACT_ZERO_TOL]
    if len(pts) < 2:
        table.fit = FitResult(float("-inf"), float("nan"), 0.0, len(pts), exact_identity=True)
        return table.fit
    xs = np.log([m for m, _ in pts])
    ys = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = float(np.sqrt(np.mean((slope * xs + intercept - ys) ** 2)))
    table.fit = FitResult(float(slope), float(intercept), residual, len(pts))
    return table.fit


@lru_cache(maxsize=None)
def cached_toeplitz(f: CanonicalSymbol, m: int) -> OperatorMatrix:
    return toeplitz_exact(f, m)


def norm_defect(f: CanonicalSymbol, m: int, sup: float | None = None, toeplitz=cached_toeplitz) -> float:
    """sup|f| minus the operator norm of the level-m Toeplitz matrix."""
    if sup is None:
        sup = sup_norm(f)
    return sup - operator_norm(toeplitz(f, m))


def dirac_defect(f: CanonicalSymbol, g: CanonicalSymbol, m: int, toeplitz=cached_toeplitz) -> float:
    """|| m i [T_f, T_g] - T_{{f,g}} || at level m."""
    bracket = toeplitz(poisson_bracket(f, g), m)
    comm = commutator(toeplitz(f, m), toeplitz(g, m))
    return operator_norm(m * 1j * comm - bracket.entries)


def sass_remainder(
    f: CanonicalSymbol,
    g: CanonicalSymbol,
    coeffs: list[CanonicalSymbol],
    m: int,
    toeplitz=cached_toeplitz,
) -> float:
    """|| T_f T_g - sum_{j<N} m^-j T_{coeffs[j]} || for N = len(coeffs) <= 2."""
    n = len(coeffs)
    if n > 2:
        raise UnknownCoefficientOrder(f"remainder order {n} needs unavailable coefficients")
    acc = toeplitz(f, m).entries @ toeplitz(g, m).entries
    for j, cj in enumerate(coeffs):
        acc = acc - float(m) ** (-j) * toeplitz(cj, m).entries
    return operator_norm(acc)


def product_coefficients(f: CanonicalSymbol, g: CanonicalSymbol, order: int) -> list[CanonicalSymbol]:
    """[c0(f,g)] or [c0(f,g), c1(f,g)] for use in sass_remainder."""
    if order == 1:
        return [f * g]
    if order == 2:
        return [f * g, c1(f, g)]
    raise UnknownCoefficientOrder(f"no closed-form coefficients beyond order 2 (got {order})")


def tuynman_defect(f: CanonicalSymbol, m: int, toeplitz=toeplitz_exact, prequantum=prequantum_geometric) -> float:
    """|| Q_f - i T_{f - Delta f/(2m)} ||; identically zero for this model."""
    rhs = toeplitz(f - laplacian(f).scale(Fraction(1, 2 * m)), m)
    return operator_norm(prequantum(f, m).entries - 1j * rhs.entries)


def spectral_moment(f: CanonicalSymbol, m: int, k: int, toeplitz=cached_toeplitz) -> float:
    """(1/m) sum of the k-th powers of the level-m Toeplitz eigenvalues."""
    if k < 1:
        raise ValueError("moment order k must be >= 1")
    eigs = hermitian_eigenvalues(toeplitz(f, m))
    return float(np.sum(eigs**k) / m)


def moment_limit(f: CanonicalSymbol, k: int) -> QC:
    """Classical limit of the k-th spectral moment: the average of f^k."""
    fk = f
    for _ in range(k - 1):
        fk = fk * f
    return average(fk)


def trace_sequence(f: CanonicalSymbol, m_list) -> ConvergenceTable:
    records = [(m, float(trace_exact_level(f, m).re)) for m in m_list]
    return ConvergenceTable("trace", records)


def trace_exact_level(f: CanonicalSymbol, m: int) -> QC:
    total = QC(0)
    kernel = cached_toeplitz(f, m).kernel
    for j in range(m + 1):
        total = total + kernel[j][j]
    return total


def extract_tau(f: CanonicalSymbol, m_list=DEFAULT_SWEEP) -> tuple[QC, QC]:
    """Fit Tr T_f^(m) = tau0*m + tau1 exactly over the sweep.

    The trace is exactly linear in m on this geometry; any nonlinearity
    signals an assembly bug and raises.
    """
    ms = list(m_list)
    if len(ms) < 2:
        raise ValueError("need at least two levels to extract tau")
    tr = {m: trace_exact_level(f, m) for m in ms}
    tau0 = (tr[ms[1]] - tr[ms[0]]) / QC(ms[1] - ms[0])
    tau1 = tr[ms[0]] - tau0 * QC(ms[0])
    for m in ms[2:]:
        if tr[m] != tau0 * QC(m) + tau1:
            raise RuntimeError(f"trace is not linear in m at level {m}")
    return tau0, tau1


# -- sweep builders ----------------------------------------------------------


def norm_defect_table(f: CanonicalSymbol, m_list=DEFAULT_SWEEP, name: str = "norm_defect") -> ConvergenceTable:
    sup = sup_norm(f)
    return ConvergenceTable(name, [(m, norm_defect(f, m, sup)) for m in m_list])


def dirac_defect_table(
    f: CanonicalSymbol, g: CanonicalSymbol, m_list=DEFAULT_SWEEP, name: str = "dirac_defect"
) -> ConvergenceTable:
    return ConvergenceTable(name, [(m, dirac_defect(f, g, m)) for m in m_list])


def sass_remainder_table(
    f: CanonicalSymbol, g: CanonicalSymbol, order: int, m_list=DEFAULT_SWEEP, name: str | None = None
) -> ConvergenceTable:
    coeffs = product_coefficients(f, g, order)
    name = name or f"product_remainder_n{order}"
    return ConvergenceTable(name, [(m, sass_remainder(f, g, coeffs, m)) for m in m_list])


def spectral_moment_table(
    f: CanonicalSymbol, k: int, m_list=DEFAULT_SWEEP, name: str | None = None
) -> ConvergenceTable:
    limit = float(moment_limit(f, k).re)
    name = name or f"moment_defect_k{k}"
    return ConvergenceTable(name, [(m, abs(spectral_moment(f, m, k) - limit)) for m in m_list])


def tuynman_defect_table(f: CanonicalSymbol, m_list=DEFAULT_SWEEP, name: str = "tuynman_defect") -> ConvergenceTable:
    return ConvergenceTable(name, [(m, tuynman_defect(f, m)) for m in m_list])
