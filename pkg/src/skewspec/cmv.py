"""Finite extended CMV operators.

For Verblunsky data alpha_n and rho_n = sqrt(1 - |alpha_n|^2) the block

    Theta_n = [[conj(alpha_n), rho_n], [rho_n, -alpha_n]]

acts on sites {n, n+1}.  L collects the blocks with n even, M those with
n odd, and E = L M.  On an interval [a, b] the coefficients alpha_{a-1}
and alpha_b are replaced by unimodular boundary phases beta, beta_tilde,
which decouples the interval.

Rather than E - z, most of the numerics work with the tridiagonal

    A(z) = z L^* - M = L^* (z - E).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ContractViolation, ReductionUnavailable
from .sampling import VerblunskyPath
from .schrodinger import SchrodingerFiniteOp
from .tridiag import Tridiagonal

UNIMODULAR_TOL = 1e-12
DENSE_LIMIT = 1024


def _check_unimodular(name, value):
    if abs(abs(value) - 1.0) > UNIMODULAR_TOL:
        raise ContractViolation(f"boundary phase {name} = {value} is not unimodular")


@dataclass(frozen=True, eq=False)
class FiniteCMV:
    path: VerblunskyPath
    beta: complex
    beta_tilde: complex
    L: object
    M: object
    E: object

    @property
    def a(self) -> int:
        return self.path.a

    @property
    def b(self) -> int:
        return self.path.b

    @property
    def n(self) -> int:
        return len(self.path)

    @property
    def dense_storage(self) -> bool:
        return isinstance(self.E, np.ndarray)

    def extended_alphas(self) -> np.ndarray:
        """alpha_{a-1}, ..., alpha_b with the boundary phases substituted."""
        ext = np.empty(self.n + 1, dtype=complex)
        ext[0] = self.beta
        ext[1:-1] = self.path.alphas[:-1]
        ext[-1] = self.beta_tilde
        return ext

    def extended_rhos(self) -> np.ndarray:
        """rho_{a-1}, ..., rho_b; the boundary entries are zero."""
        out = np.zeros(self.n + 1)
        out[1:-1] = self.path.rhos[:-1]
        return out

    def dense(self, which: str = "E") -> np.ndarray:
        mat = getattr(self, which)
        return mat if isinstance(mat, np.ndarray) else mat.toarray()


def _assemble_factor(ext_alpha, ext_rho, a: int, parity: int, dense: bool):
    """Direct sum of Theta_n over n of the given parity, restricted to [a, b]."""
    n = len(ext_alpha) - 1
    rows, cols, vals = [], [], []
    for i in range(n + 1):
        site = a - 1 + i
        if site % 2 != parity:
            continue
        al, rh = ext_alpha[i], ext_rho[i]
        p, q = i - 1, i  # local indices of sites {site, site + 1}
        if p >= 0:
            rows.append(p); cols.append(p); vals.append(np.conj(al))
        if q < n:
            rows.append(q); cols.append(q); vals.append(-al)
        if p >= 0 and q < n:
            rows += [p, q]; cols += [q, p]; vals += [rh, rh]
    mat = sp.csr_array((np.array(vals, dtype=complex), (rows, cols)), shape=(n, n))
    return mat.toarray() if dense else mat


def assemble_finite_cmv(path: VerblunskyPath, beta: complex = 1.0,
                        beta_tilde: complex = 1.0) -> FiniteCMV:
    """E^{[a,b]}_{beta, beta_tilde} = L M with the given boundary phases."""
    _check_unimodular("beta", beta)
    _check_unimodular("beta_tilde", beta_tilde)
    if len(path) < 1:
        raise ContractViolation("empty Verblunsky path")
    ext = np.empty(len(path) + 1, dtype=complex)
    ext[0] = beta
    ext[1:-1] = path.alphas[:-1]
    ext[-1] = beta_tilde
    rho = np.zeros(len(path) + 1)
    rho[1:-1] = path.rhos[:-1]
    dense = len(path) <= DENSE_LIMIT
    L = _assemble_factor(ext, rho, path.a, 0, dense)
    M = _assemble_factor(ext, rho, path.a, 1, dense)
    E = L @ M
    return FiniteCMV(path, complex(beta), complex(beta_tilde), L, M, E)


def unitarity_defect(op: FiniteCMV) -> float:
    """max |E^* E - I| entrywise."""
    E = op.dense("E")
    return float(np.abs(E.conj().T @ E - np.eye(op.n)).max())


def tridiagonal_A(op: FiniteCMV, z: complex, certify: bool = True) -> Tridiagonal:
    """A(z) = z L^* - M from the closed-form entries.

    Diagonal: z alpha_j + alpha_{j-1} (j even), -z conj(alpha_{j-1}) - conj(alpha_j) (j odd).
    Off-diagonal (j, j+1): z rho_j (j even), -rho_j (j odd).
    With ``certify`` the product form is also built and the max entry
    discrepancy stored in ``certified_error``.
    """
    ext = op.extended_alphas()
    rho = op.extended_rhos()
    sites = np.arange(op.a, op.b + 1)
    even = sites % 2 == 0
    cur = ext[1:]
    prev = ext[:-1]
    diag = np.where(even, z * cur + prev, -z * np.conj(prev) - np.conj(cur))
    r = rho[1:-1]
    off = np.where(even[:-1], z * r, -r)
    T = Tridiagonal(off, diag, off.copy())
    if certify:
        prod = z * op.L.conj().T - op.M
        prod = prod if isinstance(prod, np.ndarray) else prod.toarray()
        T.certified_error = float(np.abs(prod - T.dense()).max())
    return T


def product_form_A(op: FiniteCMV, z: complex) -> np.ndarray:
    prod = z * op.L.conj().T - op.M
    return prod if isinstance(prod, np.ndarray) else prod.toarray()


def reduction_phases(alpha_before: complex, alpha_last: complex) -> tuple[complex, complex]:
    """Boundary phases whose real parts equal Re(alpha_{a-1}) and Re(alpha_b).

    With these, the real-part reduction of E^{[a,b]} coincides with the
    Dirichlet restriction of the whole-line reduction.
    """
    def phase(c):
        re = float(np.real(c))
        return complex(re, np.sqrt(max(0.0, 1.0 - re * re)))
    return phase(alpha_before), phase(alpha_last)


def schrodinger_reduction(op: FiniteCMV, tol: float = 1e-12) -> tuple[SchrodingerFiniteOp, float]:
    """Real part of A(-1), rescaled to unit hopping.

    B = Re(-L^* - M) has B_jj = Re(alpha_{j-1} - alpha_j) and off-diagonal
    -rho.  Conjugating by diag((-1)^j) flips the hopping sign; dividing by
    rho gives H = Delta + V with V_j = Re(alpha_{j-1} - alpha_j) / rho and
    coupling g = |lambda| / rho.  Needs |alpha_n| constant on [a, b-1].
    """
    rhos = op.path.rhos[:-1]
    if len(rhos) == 0:
        lam = float(np.abs(op.path.alphas[0]))
        rho = float(np.sqrt(1.0 - lam * lam))
    else:
        rho = float(rhos[0])
        lam = float(np.abs(op.path.alphas[0]))
        if np.abs(rhos / rho - 1.0).max() > tol:
            raise ReductionUnavailable("|alpha_n| is not constant, hopping would not be uniform")
    A = tridiagonal_A(op, -1.0, certify=False)
    diag = A.diag.real / rho
    return SchrodingerFiniteOp(op.a, op.b, diag), lam / rho
