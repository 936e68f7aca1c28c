"""Operator assembly on the level-m section spaces, exact and by quadrature.

Matrices are expressed in the orthonormal monomial basis z^j/||z^j||.  The
exact path assembles the operator in the *unnormalized* monomial basis,
where every entry is a rational combination of Beta integrals, and converts
to floating point once at the end; that rational kernel is kept on the
result so identities can be checked with no tolerance at all.

For a numerator monomial z^a zbar^b over (1+t)^R paired between z^j and
z^k, the angular integral enforces a + k = b + j and the radial integral is
B(s+1, m+R+1-s) with s = (a+b+j+k)/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, sqrt

import numpy as np

from .errors import QuadratureBudgetTooSmall, ShapeMismatch
from .exact import QC, QC_I
from .hilbert import basis_norm_sq, dimension
from .symbols import CanonicalSymbol, ChartRational, hamiltonian_field

Kernel = tuple[tuple[QC, ...], ...]


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """A dense operator on the level-m section space.

    ``entries`` is the matrix in the orthonormal basis; ``kernel``, when
    present, is the exact matrix in the unnormalized monomial basis (the
    two are conjugate by the diagonal of basis norms).
    """

    m: int
    entries: np.ndarray
    provenance: str
    source: str
    kernel: Kernel | None = None

    def __post_init__(self):
        n = dimension(self.m)
        if self.entries.shape != (n, n):
            raise ShapeMismatch(f"expected {(n, n)} entries, got {self.entries.shape}")
        self.entries.flags.writeable = False


def _entries_from_kernel(kernel: Kernel, m: int) -> np.ndarray:
    scale = [sqrt(float(basis_norm_sq(m, j))) for j in range(m + 1)]
    out = np.empty((m + 1, m + 1), dtype=complex)
    for j in range(m + 1):
        for k in range(m + 1):
            out[j, k] = complex(kernel[j][k]) * (scale[j] / scale[k])
    return out


def _from_kernel(kernel: list[list[QC]], m: int, provenance: str, source: str) -> OperatorMatrix:
    frozen = tuple(tuple(row) for row in kernel)
    return OperatorMatrix(m, _entries_from_kernel(frozen, m), provenance, source, frozen)


def _radial_fraction(m: int, r: int, j: int, s: int) -> Fraction:
    # B(s+1, m+r+1-s) / ||z^j||^2, both in units of 2*pi
    x = m + r
    if s > x:
        raise ValueError(f"non-integrable pairing: s={s} exceeds m+R={x}")
    return Fraction((m + 1) * comb(m, j), (x + 1) * comb(x, s))


def _zero_kernel(m: int) -> list[list[QC]]:
    return [[QC(0)] * (m + 1) for _ in range(m + 1)]


def toeplitz_exact(f: CanonicalSymbol, m: int, source: str = "") -> OperatorMatrix:
    """The Toeplitz operator of f at level m: compress multiplication by f
    onto holomorphic sections.  Exact rational assembly."""
    if m < 0:
        raise ValueError("level m must be >= 0")
    kernel = _zero_kernel(m)
    r = f.denom_exp
    for (a, b), c in f.terms.items():
        for k in range(m + 1):
            j = a + k - b
            if not 0 <= j <= m:
                continue
            s = (a + b + j + k) // 2
            kernel[j][k] = kernel[j][k] + c * _radial_fraction(m, r, j, s)
    return _from_kernel(kernel, m, "exact", source or f"symbol({f!r})")


def pairing_kernel_column(g: ChartRational, m: int) -> list[QC]:
    """<z^j, g> / (2*pi * ||z^j||^2) for j = 0..m, exact."""
    col = [QC(0)] * (m + 1)
    r = g.denom_exp
    for (a, b), c in g.terms.items():
        j = a - b
        if not 0 <= j <= m:
            continue
        s = (a + b + j) // 2
        col[j] = col[j] + c * _radial_fraction(m, r, j, s)
    return col


def prequantum_geometric(f: CanonicalSymbol, m: int, source: str = "") -> OperatorMatrix:
    """Geometric-quantization operator Q_f at level m, exactly.

    Compresses the prequantum operator P_f = -nabla_{X} + i f onto the
    holomorphic sections, where X is the Hamiltonian field of f for the
    level-m form m*omega (so X = X_f/m in the chart) and nabla acts on a
    holomorphic section as X^z (d/dz + m dlog(hhat)/dz) with
    dlog(hhat)/dz = -zbar/(1+t).
    """
    if m < 1:
        raise ValueError("level m must be >= 1")
    if not f.is_real:
        raise ValueError("prequantum_geometric requires a real symbol")
    xz = hamiltonian_field(f).comp_z.scale(Fraction(1, m))
    kernel = _zero_kernel(m)
    for k in range(m + 1):
        # P_f z^k = -X^z (k z^{k-1} - m z^k zbar/(1+t)) + i f z^k
        g = (f * ChartRational({(k, 0): QC(1)}, 0)).scale(QC_I)
        g = g + xz * ChartRational({(k, 1): QC(m)}, 1)
        if k:
            g = g + (xz * ChartRational({(k - 1, 0): QC(k)}, 0)).scale(-1)
        col = pairing_kernel_column(g, m)
        for j in range(m + 1):
            kernel[j][k] = col[j]
    return _from_kernel(kernel, m, "exact", source or f"prequantum({f!r})")


# -- quadrature path --------------------------------------------------------


def _sphere_rule(n_radial: int, n_angular: int):
    if n_radial < 1 or n_angular < 1:
        raise QuadratureBudgetTooSmall("need at least one node in each direction")
    u, w = np.polynomial.legendre.leggauss(n_radial)
    phi = 2.0 * np.pi * np.arange(n_angular) / n_angular
    return u, w, phi


def _eval_on_grid(fn, z: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(fn(z), dtype=complex)
        if vals.shape == z.shape:
            return vals
    except Exception:
        pass
    return np.vectorize(lambda p: complex(fn(p)))(z)


def toeplitz_quadrature(fn, m: int, n_radial: int, n_angular: int, source: str = "") -> OperatorMatrix:
    """Toeplitz assembly for a black-box point evaluator fn(z) -> complex.

    Gauss-Legendre in u = (t-1)/(t+1) times a uniform (trapezoid) rule in
    the phase; for symbol-algebra inputs with m + R < 2*n_radial the radial
    integrand is a polynomial in u and the rule is exact up to rounding.
    """
    u, w, phi = _sphere_rule(n_radial, n_angular)
    tau_hi = (1.0 + u) / 2.0  # t/(1+t) on the nodes
    tau_lo = (1.0 - u) / 2.0  # 1/(1+t)
    t = tau_hi / tau_lo
    z = np.sqrt(t)[:, None] * np.exp(1j * phi[None, :])
    vals = _eval_on_grid(fn, z)
    scale = max(1.0, float(np.max(np.abs(vals))))
    looks_real = float(np.max(np.abs(vals.imag))) <= 1e-9 * scale

    # angular transform: ang[i, nu+m] = sum_l vals[i,l] e^{i nu phi_l} * (2 pi / n_a)
    nus = np.arange(-m, m + 1)
    ang = vals @ np.exp(1j * np.outer(phi, nus)) * (2.0 * np.pi / n_angular)

    norms = np.array([2.0 * np.pi * float(basis_norm_sq(m, j)) for j in range(m + 1)])
    entries = np.empty((m + 1, m + 1), dtype=complex)
    for j in range(m + 1):
        for k in range(m + 1):
            radial = tau_hi ** ((j + k) / 2.0) * tau_lo ** (m - (j + k) / 2.0)
            val = np.sum((w / 2.0) * radial * ang[:, (k - j) + m])
            entries[j, k] = val / sqrt(norms[j] * norms[k])

    if looks_real:
        defect = float(np.max(np.abs(entries - entries.conj().T)))
        if defect > 1e-6:
            raise QuadratureBudgetTooSmall(
                f"Hermiticity defect {defect:.3e} at ({n_radial}, {n_angular}) nodes"
            )
    return OperatorMatrix(m, entries, f"quadrature(gl{n_radial}x{n_angular})", source or "callable")


def gram_quadrature(m: int, n_radial: int = 64, n_angular: int = 64) -> np.ndarray:
    """Gram matrix <z^j, z^k> of the unnormalized monomials by quadrature."""
    u, w, phi = _sphere_rule(n_radial, n_angular)
    tau_hi = (1.0 + u) / 2.0
    tau_lo = (1.0 - u) / 2.0
    ang = np.array([np.sum(np.exp(1j * nu * phi)) * (2.0 * np.pi / n_angular) for nu in range(-m, m + 1)])
    gram = np.empty((m + 1, m + 1), dtype=complex)
    for j in range(m + 1):
        for k in range(m + 1):
            radial = tau_hi ** ((j + k) / 2.0) * tau_lo ** (m - (j + k) / 2.0)
            gram[j, k] = np.sum((w / 2.0) * radial) * ang[(k - j) + m]
    return gram


# -- matrix analysis --------------------------------------------------------


def _as_array(x) -> np.ndarray:
    if isinstance(x, OperatorMatrix):
        return x.entries
    return np.asarray(x, dtype=complex)


def operator_norm(x) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(_as_array(x), 2))


def hermitian_eigenvalues(x, herm_tol: float = 1e-9) -> np.ndarray:
    """Eigenvalues of a (numerically) Hermitian matrix, ascending."""
    arr = _as_array(x)
    defect = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
    if defect > herm_tol * max(1.0, float(np.max(np.abs(arr))) if arr.size else 1.0):
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    return np.linalg.eigvalsh((arr + arr.conj().T) / 2.0)


def commutator(x, y) -> np.ndarray:
    a, b = _as_array(x), _as_array(y)
    if a.shape != b.shape:
        raise ShapeMismatch(f"commutator of shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def adjoint(x):
    """Hermitian adjoint; exact on the monomial-basis kernel when present."""
    if isinstance(x, OperatorMatrix):
        kernel = None
        if x.kernel is not None:
            m = x.m
            c = [basis_norm_sq(m, j) for j in range(m + 1)]
            kernel = tuple(
                tuple(x.kernel[k][j].conjugate() * Fraction(c[k], c[j]) for k in range(m + 1))
                for j in range(m + 1)
            )
        return OperatorMatrix(x.m, x.entries.conj().T.copy(), x.provenance, f"adjoint({x.source})", kernel)
    return _as_array(x).conj().T


# -- exact kernel arithmetic -------------------------------------------------


def _require_kernels(*mats: OperatorMatrix) -> int:
    m = mats[0].m
    for mat in mats:
        if mat.kernel is None:
            raise ValueError(f"exact kernel missing on {mat.source!r} ({mat.provenance})")
        if mat.m != m:
            raise ShapeMismatch("levels differ")
    return m


def compose_exact(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    m = _require_kernels(a, b)
    n = m + 1
    kernel = _zero_kernel(m)
    for j in range(n):
        row = a.kernel[j]
        for l in range(n):
            alj = row[l]
            if not alj:
                continue
            brow = b.kernel[l]
            for k in range(n):
                if brow[k]:
                    kernel[j][k] = kernel[j][k] + alj * brow[k]
    return _from_kernel(kernel, m, "exact", f"({a.source})*({b.source})")


def lincomb_exact(terms: list[tuple[QC | int | Fraction, OperatorMatrix]]) -> OperatorMatrix:
    m = _require_kernels(*[mat for _, mat in terms])
    kernel = _zero_kernel(m)
    for coeff, mat in terms:
        c = QC.coerce(coeff)
        for j in range(m + 1):
            for k in range(m + 1):
                if mat.kernel[j][k]:
                    kernel[j][k] = kernel[j][k] + c * mat.kernel[j][k]
    label = " + ".join(f"({mat.source})" for _, mat in terms)
    return _from_kernel(kernel, m, "exact", label)


def trace_exact(a: OperatorMatrix) -> QC:
    m = _require_kernels(a)
    total = QC(0)
    for j in range(m + 1):
        total = total + a.kernel[j][j]
    return total


def equal_exact(a: OperatorMatrix, b: OperatorMatrix) -> bool:
    m = _require_kernels(a, b)
    return all(a.kernel[j][k] == b.kernel[j][k] for j in range(m + 1) for k in range(m + 1))


def identity_exact(m: int) -> OperatorMatrix:
    kernel = _zero_kernel(m)
    for j in range(m + 1):
        kernel[j][j] = QC(1)
    return _from_kernel(kernel, m, "exact", "id")
