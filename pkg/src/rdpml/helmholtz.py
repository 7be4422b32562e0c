"""Frequency-domain RDPML for the 1D Helmholtz problem.

Unknowns are ordered (v, Phi^(1), ..., Phi^(p), Psi^(1), ..., Psi^(p)), each
block of length n. With u = v e^{-i omega t} the time-domain system becomes

    v row:    (omega^2 + L_p) v + h sum a_{m+l-1} (G^m_{j+l} - F^m_{j-l})  = b
    Phi row:  (v_{j-r+2} - v_{j-r}) / 2h + (F^r_j + F^r_{j-1}) / 2
              + sum_{l<r} (F^{r-l}_{j-1-l} - F^{r-l}_{j+1-l}) / 2 - i omega Phi^r_j = 0
    Psi row:  (v_{j+r} - v_{j+r-2}) / 2h + (G^r_j + G^r_{j+1}) / 2
              + sum_{l<r} (G^{r-l}_{j+l+1} - G^{r-l}_{j+l-1}) / 2 - i omega Psi^r_j = 0

with F_k = sigma_k Phi_k and G_k = sigma_{k-1} Psi_k. Within one family the
diagonal block is C1 (lower bidiagonal) for Phi and C2 (upper bidiagonal) for
Psi; lower-order families couple through E (Phi) and F (Psi) blocks, and v
enters through D1, D2.

Two truncations are supported: ``periodic`` (ring) and ``dirichlet``
(homogeneous Dirichlet at virtual nodes -1 and n). For the Dirichlet
truncation the face variables Phi_{n-1} and Psi_0 are never read; their rows
keep only the C1/C2 part, which leaves v unchanged and keeps C1, C2 in the
closed-form bidiagonal shape.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dispersion import DampingProfile
from .stencil import StencilCoeffs, stencil_coefficients

__all__ = [
    "ComplexSparseMatrix",
    "HelmholtzSolution",
    "SingularFrequencyError",
    "SolverError",
    "assemble_full",
    "assemble_reduced",
    "triangular_inverse_entries",
    "c_inverse",
    "solve",
    "solve_reduced",
    "sparsity_report",
    "point_source",
]


class SingularFrequencyError(ValueError):
    pass


class SolverError(RuntimeError):
    def __init__(self, msg: str, condition: float | None = None):
        super().__init__(msg if condition is None else f"{msg} (condition estimate {condition:.3e})")
        self.condition = condition


@dataclass
class ComplexSparseMatrix:
    """CSR matrix plus named row/column blocks."""

    csr: sp.csr_matrix
    blocks: dict = field(default_factory=dict)
    kind: str = "full"
    omega: float = float("nan")

    @property
    def shape(self):
        return self.csr.shape

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def block(self, row: str, col: str) -> sp.csr_matrix:
        return self.csr[self.blocks[row], :][:, self.blocks[col]]

    def triplets(self):
        coo = self.csr.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()


@dataclass
class HelmholtzSolution:
    v_tilde: np.ndarray
    omega: float
    phi_hat: np.ndarray | None = None
    psi_hat: np.ndarray | None = None
    residual: float = 0.0


# ----------------------------------------------------------------------------
# assembly
# ----------------------------------------------------------------------------
def _setup(omega, n, sigma, bc):
    if omega == 0:
        raise SingularFrequencyError("omega must be nonzero")
    if bc not in ("periodic", "dirichlet"):
        raise ValueError(f"unsupported truncation {bc!r}; use 'periodic' or 'dirichlet'")
    if isinstance(sigma, DampingProfile):
        sigma = sigma.sigma
    sigma = np.zeros(n) if sigma is None else np.asarray(sigma, dtype=float)
    if sigma.shape != (n,) or np.any(sigma < 0):
        raise ValueError("sigma must be a non-negative sequence of length n")
    return sigma


class _Builder:
    def __init__(self, omega, n, h, p, a, sigma, bc):
        self.omega, self.n, self.h, self.p, self.a = omega, n, h, p, a
        self.sigma, self.bc = sigma, bc
        self.rows, self.cols, self.vals = [], [], []

    # column offset of each block
    def vcol(self, j):
        return j

    # r is zero-based inside the builder
    def phicol(self, r, j):
        return (1 + r) * self.n + j

    def psicol(self, r, j):
        return (1 + self.p + r) * self.n + j

    def v_ref(self, j):
        """(index, sign) of v_j after applying the truncation, or None."""
        n = self.n
        if self.bc == "periodic":
            return j % n, 1.0
        if 0 <= j < n:
            return j, 1.0
        if j == -1 or j == n:
            return None
        return (-2 - j, -1.0) if j < 0 else (2 * n - j, -1.0)

    def sig_f(self, j):
        """sigma weighting F at (possibly ghost) index j, with its stored index."""
        n = self.n
        if self.bc == "periodic":
            j %= n
        elif not 0 <= j < n:
            return None
        return j, self.sigma[j]

    def sig_g(self, j):
        n = self.n
        if self.bc == "periodic":
            j %= n
            return j, self.sigma[(j - 1) % n]
        if not 0 <= j < n or j == 0:
            return None
        return j, self.sigma[j - 1]

    def add(self, row, col, val):
        if val != 0:
            self.rows.append(row)
            self.cols.append(col)
            self.vals.append(val)

    def add_v(self, row, j, coef):
        ref = self.v_ref(j)
        if ref is not None:
            self.add(row, self.vcol(ref[0]), coef * ref[1])

    def add_F(self, row, r, j, coef):
        ref = self.sig_f(j)
        if ref is not None:
            self.add(row, self.phicol(r - 1, ref[0]), coef * ref[1])

    def add_G(self, row, r, j, coef):
        ref = self.sig_g(j)
        if ref is not None:
            self.add(row, self.psicol(r - 1, ref[0]), coef * ref[1])

    def build(self):
        n, p, h, a, w = self.n, self.p, self.h, self.a, self.omega
        iw = 1j * w
        dirichlet = self.bc == "dirichlet"
        for j in range(n):
            row = self.vcol(j)
            self.add(row, row, w * w + a[0])
            for r in range(1, p + 1):
                self.add_v(row, j + r, a[r])
                self.add_v(row, j - r, a[r])
            for m in range(1, p + 1):
                for l in range(1, p + 2 - m):
                    self.add_G(row, m, j + l, h * a[m + l - 1])
                    self.add_F(row, m, j - l, -h * a[m + l - 1])
        for r in range(1, p + 1):
            for j in range(n):
                row = self.phicol(r - 1, j)
                self.add(row, row, -iw)
                self.add_F(row, r, j, 0.5)
                self.add_F(row, r, j - 1, 0.5)
                if dirichlet and j == n - 1:
                    continue  # face beyond the last node: C1 part only
                self.add_v(row, j - r + 2, 0.5 / h)
                self.add_v(row, j - r, -0.5 / h)
                for l in range(1, r):
                    self.add_F(row, r - l, j - 1 - l, 0.5)
                    self.add_F(row, r - l, j + 1 - l, -0.5)
            for j in range(n):
                row = self.psicol(r - 1, j)
                self.add(row, row, -iw)
                self.add_G(row, r, j, 0.5)
                self.add_G(row, r, j + 1, 0.5)
                if dirichlet and j == 0:
                    continue
                self.add_v(row, j + r, 0.5 / h)
                self.add_v(row, j + r - 2, -0.5 / h)
                for l in range(1, r):
                    self.add_G(row, r - l, j + l + 1, 0.5)
                    self.add_G(row, r - l, j + l - 1, -0.5)
        size = (2 * p + 1) * n
        m = sp.coo_matrix((np.array(self.vals, dtype=complex), (self.rows, self.cols)), shape=(size, size)).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        return m


def _blocks(n, p):
    blocks = {"v": slice(0, n)}
    for r in range(1, p + 1):
        blocks[f"phi{r}"] = slice(r * n, (r + 1) * n)
        blocks[f"psi{r}"] = slice((p + r) * n, (p + r + 1) * n)
    return blocks


def assemble_full(omega: float, n: int, h: float, p: int, sigma=None, bc: str = "periodic",
                  stencil: StencilCoeffs | None = None) -> ComplexSparseMatrix:
    """Block system in the unknown order (v, Phi^(1..p), Psi^(1..p))."""
    sigma = _setup(omega, n, sigma, bc)
    s = stencil_coefficients(p, h) if stencil is None else stencil
    if n < 2 * p + 1:
        raise ValueError("grid too short for the stencil")
    m = _Builder(float(omega), n, h, p, s.scaled, sigma, bc).build()
    return ComplexSparseMatrix(m, _blocks(n, p), "full", float(omega))


def point_source(n: int, p: int, index: int, system: str = "full") -> np.ndarray:
    size = n if system == "reduced" else (2 * p + 1) * n
    b = np.zeros(size, dtype=complex)
    b[index] = 1.0
    return b


# ----------------------------------------------------------------------------
# closed-form triangular inverses
# ----------------------------------------------------------------------------
def triangular_inverse_entries(which: str, omega: float, sigma, i: int, j: int, sigma_prev: float = 0.0) -> complex:
    """Entry (i, j) of C1^{-1} (lower) or C2^{-1} (upper) from the closed form.

    C1 has diagonal (sigma_i - 2 i omega)/2 and subdiagonal sigma_{i-1}/2;
    C2 has diagonal (sigma_{i-1} - 2 i omega)/2 (``sigma_prev`` stands for
    sigma_{-1}) and superdiagonal sigma_i/2. Off-triangle queries return 0.
    """
    if omega == 0:
        raise SingularFrequencyError("omega must be nonzero")
    sigma = np.asarray(sigma, dtype=float)
    d = -2j * omega
    if which.upper() == "C1":
        if j > i:
            return 0j
        val = 2.0 * (-1) ** (i + j) / (d + sigma[i])
        for l in range(j, i):
            val *= sigma[l] / (d + sigma[l])
        return complex(val)
    if which.upper() == "C2":
        if j < i:
            return 0j
        prev = sigma[i - 1] if i > 0 else sigma_prev
        val = 2.0 * (-1) ** (i + j) / (d + prev)
        for l in range(i, j):
            val *= sigma[l] / (d + sigma[l])
        return complex(val)
    raise ValueError("which must be 'C1' or 'C2'")


def _rotation(sigma: np.ndarray, bc: str) -> np.ndarray:
    n = sigma.shape[0]
    if bc != "periodic":
        return np.arange(n)
    # start right after a node with sigma = 0 so the ring corner entry vanishes
    zeros = np.flatnonzero(sigma == 0)
    if zeros.size == 0:
        raise ValueError("periodic reduction needs at least one undamped node")
    after = (zeros + 1) % n
    damped = after[sigma[after] > 0]
    k0 = int(damped[0]) if damped.size else int(after[0])
    return (k0 + np.arange(n)) % n


def c_inverse(which: str, omega: float, sigma, bc: str = "dirichlet") -> np.ndarray:
    """Dense C1^{-1} or C2^{-1} built column by column from the closed form."""
    if omega == 0:
        raise SingularFrequencyError("omega must be nonzero")
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0]
    perm = _rotation(sigma, bc)
    s = sigma[perm]
    prev = sigma[(perm[0] - 1) % n] if bc == "periodic" else 0.0
    d = -2j * omega
    q = s / (d + s)
    inv = np.zeros((n, n), dtype=complex)
    sign = lambda k: np.where(np.arange(k) % 2 == 0, 1.0, -1.0)
    if which.upper() == "C1":
        for k in range(n):
            # rows i >= k: 2 (-1)^{i-k} / (d + s_i) * prod_{l=k}^{i-1} q_l
            prods = np.concatenate([[1.0 + 0j], np.cumprod(q[k:n - 1])])
            inv[k:, k] = 2.0 * sign(n - k) * prods / (d + s[k:])
    elif which.upper() == "C2":
        sp_prev = np.concatenate([[prev], s[:-1]])
        for k in range(n):
            # rows i <= k: 2 (-1)^{k-i} / (d + s_{i-1}) * prod_{l=i}^{k-1} q_l
            prods = np.concatenate([[1.0 + 0j], np.cumprod(q[k - 1::-1] if k > 0 else q[:0])])[::-1]
            inv[:k + 1, k] = 2.0 * sign(k + 1)[::-1] * prods / (d + sp_prev[:k + 1])
    else:
        raise ValueError("which must be 'C1' or 'C2'")
    out = np.empty_like(inv)
    out[np.ix_(perm, perm)] = inv
    return out


# ----------------------------------------------------------------------------
# reduced system
# ----------------------------------------------------------------------------
def assemble_reduced(omega: float, n: int, h: float, p: int, sigma=None, bc: str = "periodic",
                     stencil: StencilCoeffs | None = None, full: ComplexSparseMatrix | None = None) -> ComplexSparseMatrix:
    """Single-field operator (omega^2 + L_p) + sum_r A_r X_r + sum_r B_r Y_r.

    X_r = -C1^{-1} (D1_r + sum_{m<r} E_{r,m} X_m) gives Phi^(r) = X_r v, and
    Y_r likewise for Psi^(r) through C2^{-1}.
    """
    sigma = _setup(omega, n, sigma, bc)
    full = assemble_full(omega, n, h, p, sigma, bc, stencil) if full is None else full
    blk = full.block
    c1inv = c_inverse("C1", omega, sigma, bc)
    c2inv = c_inverse("C2", omega, sigma, bc)
    K = blk("v", "v").toarray()
    for fam, cinv in (("phi", c1inv), ("psi", c2inv)):
        X = []
        for r in range(1, p + 1):
            acc = blk(f"{fam}{r}", "v").toarray()
            for m in range(1, r):
                acc = acc + blk(f"{fam}{r}", f"{fam}{m}") @ X[m - 1]
            X.append(-(cinv @ acc))
            K = K + blk("v", f"{fam}{r}") @ X[-1]
    csr = sp.csr_matrix(K)
    csr.eliminate_zeros()
    return ComplexSparseMatrix(csr, {"v": slice(0, n)}, "reduced", float(omega))


# ----------------------------------------------------------------------------
# solvers and reports
# ----------------------------------------------------------------------------
def _condition(a: sp.spmatrix) -> float:
    if a.shape[0] <= 2000:
        try:
            return float(np.linalg.cond(a.toarray()))
        except np.linalg.LinAlgError:
            return float("inf")
    return float("nan")


def solve(system: ComplexSparseMatrix, rhs, tol: float = 1e-10) -> HelmholtzSolution:
    """Sparse LU solve; checks the relative residual against ``tol``."""
    a = system.csr.tocsc()
    b = np.asarray(rhs, dtype=complex)
    if a.shape[0] != a.shape[1] or b.shape[0] != a.shape[0]:
        raise ValueError("system must be square and match the right-hand side")
    try:
        x = spla.splu(a).solve(b)
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}", _condition(a)) from exc
    bn = np.max(np.abs(b)) if np.any(b) else 1.0
    res = float(np.max(np.abs(a @ x - b)) / bn)
    if not np.isfinite(res) or res > tol:
        raise SolverError(f"relative residual {res:.3e} exceeds {tol:.1e}", _condition(a))
    omega = system.omega
    n = system.blocks["v"].stop
    if system.kind == "full":
        p = (len(system.blocks) - 1) // 2
        phi = np.stack([x[system.blocks[f"phi{r}"]] for r in range(1, p + 1)])
        psi = np.stack([x[system.blocks[f"psi{r}"]] for r in range(1, p + 1)])
        return HelmholtzSolution(x[:n], omega, phi, psi, res)
    return HelmholtzSolution(x[:n], omega, None, None, res)


def solve_reduced(system: ComplexSparseMatrix, rhs, tol: float = 1e-10) -> HelmholtzSolution:
    return solve(system, rhs, tol)


def sparsity_report(system: ComplexSparseMatrix) -> dict:
    """Per-block nonzero counts, bandwidths and densities plus a CSV of positions."""
    out = {"shape": system.shape, "nnz": system.nnz, "blocks": {}}
    names = list(system.blocks)
    for rn in names:
        for cn in names:
            b = system.block(rn, cn).tocoo()
            if b.nnz == 0:
                continue
            off = b.col - b.row
            out["blocks"][(rn, cn)] = {
                "nnz": int(b.nnz),
                "lower_bandwidth": int(max(0, -off.min())),
                "upper_bandwidth": int(max(0, off.max())),
                "density": b.nnz / float(b.shape[0] * b.shape[1]),
            }
    rows, cols, _ = system.triplets()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row", "col"])
    w.writerows(zip(rows.tolist(), cols.tolist()))
    out["csv"] = buf.getvalue()
    return out
