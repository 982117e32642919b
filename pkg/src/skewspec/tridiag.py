"""Tridiagonal matrices with pivoted LU solves (LAPACK ?gttrf/?gttrs/?gtcon).

The scipy ?gttrf wrapper rejects n = 2, so n <= 2 uses a dense solve.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .errors import NearSpectrumError

# reciprocal condition below this is treated as singular
RCOND_FLOOR = 1e-14


@dataclass
class Tridiagonal:
    """Matrix with ``diag`` on the diagonal, ``lower[i] = A[i+1, i]``, ``upper[i] = A[i, i+1]``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    certified_error: float | None = None
    _lu: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.diag = np.asarray(self.diag, dtype=complex)
        self.lower = np.asarray(self.lower, dtype=complex)
        self.upper = np.asarray(self.upper, dtype=complex)
        n = len(self.diag)
        if len(self.lower) != max(n - 1, 0) or len(self.upper) != max(n - 1, 0):
            raise ValueError("off-diagonals must have length n - 1")

    @property
    def n(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        out = np.diag(self.diag)
        if self.n > 1:
            out += np.diag(self.lower, -1) + np.diag(self.upper, 1)
        return out

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = self.diag.reshape((-1,) + (1,) * (v.ndim - 1)) * v
        if self.n > 1:
            lo = self.lower.reshape((-1,) + (1,) * (v.ndim - 1))
            up = self.upper.reshape((-1,) + (1,) * (v.ndim - 1))
            out[1:] += lo * v[:-1]
            out[:-1] += up * v[1:]
        return out

    def shifted(self, z: complex) -> "Tridiagonal":
        """self - z * I."""
        return Tridiagonal(self.lower.copy(), self.diag - z, self.upper.copy())

    def norm1(self) -> float:
        col = np.abs(self.diag).copy()
        if self.n > 1:
            col[:-1] += np.abs(self.lower)
            col[1:] += np.abs(self.upper)
        return float(col.max(initial=0.0))

    def _factor(self):
        if self._lu is None:
            if self.n <= 2:
                self._lu = (self.dense(),)
            else:
                dl, d, du, du2, ipiv, info = lapack.zgttrf(self.lower, self.diag, self.upper)
                if info > 0:
                    raise NearSpectrumError("exactly singular tridiagonal matrix")
                self._lu = (dl, d, du, du2, ipiv)
        return self._lu

    def condition(self) -> float:
        """1-norm condition number estimate."""
        lu = self._factor()
        if len(lu) == 1:
            with np.errstate(divide="ignore"):
                c = np.linalg.cond(lu[0], 1)
            return float(np.real(c)) if np.isfinite(c) else float("inf")
        rcond, info = lapack.zgtcon(*lu, self.norm1())
        return float("inf") if rcond == 0 else 1.0 / float(rcond)

    def check_invertible(self) -> float:
        cond = self.condition()
        if not cond * RCOND_FLOOR < 1.0:
            raise NearSpectrumError("matrix is numerically singular", cond)
        return cond

    def solve(self, rhs: np.ndarray, trans: str = "N") -> np.ndarray:
        """Solve A x = rhs (``trans="C"``: A^* x = rhs)."""
        rhs = np.asarray(rhs, dtype=complex)
        lu = self._factor()
        if len(lu) == 1:
            A = lu[0].conj().T if trans == "C" else lu[0]
            if np.linalg.det(A) == 0:
                raise NearSpectrumError("exactly singular small matrix")
            return np.linalg.solve(A, rhs)
        x, info = lapack.zgttrs(*lu, rhs, trans=trans)
        return x

    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.n, dtype=complex))

    def column(self, l: int, check_residual: float | None = 1e-10) -> np.ndarray:
        """Column l of the inverse; residual ||A x - e_l||_inf checked against the tolerance."""
        e = np.zeros(self.n, dtype=complex)
        e[l] = 1.0
        x = self.solve(e)
        if check_residual is not None:
            res = np.abs(self.matvec(x) - e).max()
            scale = max(1.0, self.norm1() * np.abs(x).max())
            if res > check_residual * scale:
                raise NearSpectrumError(f"residual {res:.3e} after tridiagonal solve", self.condition())
        return x
