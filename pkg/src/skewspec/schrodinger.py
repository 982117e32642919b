"""The skew-shift Schrodinger operator  H = Delta + V,  V(n) = g f(T^n x),

with  f(x) = cos(2 pi x_r) - cos(2 pi (x_r + x_{r-1})).

Finite restrictions H^{[a,b]} use Dirichlet truncation and unit hopping.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, NearSpectrumError
from .torus import SkewShiftMap, TorusPoint, orbit
from .tridiag import Tridiagonal

TWO_PI = 2.0 * np.pi


def sampling_f(pts) -> np.ndarray:
    pts = pts.coords if isinstance(pts, TorusPoint) else np.asarray(pts, dtype=float)
    xr = pts[..., -1]
    xr1 = pts[..., -2]
    return np.cos(TWO_PI * xr) - np.cos(TWO_PI * (xr + xr1))


@dataclass(frozen=True)
class PotentialSpec:
    g: float
    map: SkewShiftMap
    x: TorusPoint

    def __post_init__(self):
        if not self.g >= 0:
            raise ContractViolation(f"coupling g must be nonnegative, got {self.g}")
        if self.map.r < 2:
            raise ContractViolation("the skew-shift potential needs r >= 2")
        if self.x.r != self.map.r:
            raise ContractViolation("base point dimension does not match the map")


def potential_at(spec: PotentialSpec, n: int) -> float:
    return float(potentials(spec, n, n)[0])


def potentials(spec: PotentialSpec, a: int, b: int) -> np.ndarray:
    """V(n) for a <= n <= b."""
    return spec.g * sampling_f(orbit(spec.map, spec.x, a, b))


@dataclass(frozen=True)
class SchrodingerFiniteOp:
    a: int
    b: int
    diagonal: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diagonal, dtype=float).reshape(-1)
        if self.b < self.a or len(d) != self.b - self.a + 1:
            raise ContractViolation("diagonal length does not match [a, b]")
        object.__setattr__(self, "diagonal", d)

    @property
    def n(self) -> int:
        return self.b - self.a + 1

    def tridiagonal(self) -> Tridiagonal:
        ones = np.ones(self.n - 1)
        return Tridiagonal(ones, self.diagonal.astype(complex), ones)

    def dense(self) -> np.ndarray:
        return self.tridiagonal().dense().real

    def restrict(self, c: int, d: int) -> "SchrodingerFiniteOp":
        if not self.a <= c <= d <= self.b:
            raise ContractViolation(f"[{c}, {d}] not inside [{self.a}, {self.b}]")
        return SchrodingerFiniteOp(c, d, self.diagonal[c - self.a:d - self.a + 1])


def schrodinger_operator(spec: PotentialSpec, a: int, b: int) -> SchrodingerFiniteOp:
    return SchrodingerFiniteOp(a, b, potentials(spec, a, b))


def free_operator(a: int, b: int) -> SchrodingerFiniteOp:
    return SchrodingerFiniteOp(a, b, np.zeros(b - a + 1))


def resolvent_matrix(op: SchrodingerFiniteOp, z: complex) -> Tridiagonal:
    """H^{[a,b]} - z as a tridiagonal matrix."""
    return op.tridiagonal().shifted(z)


def green_entry_schrodinger(op: SchrodingerFiniteOp, z: complex, k: int, l: int,
                            return_condition: bool = False):
    """<delta_k, (H^{[a,b]} - z)^{-1} delta_l>."""
    if not (op.a <= k <= op.b and op.a <= l <= op.b):
        raise ContractViolation(f"sites ({k}, {l}) outside [{op.a}, {op.b}]")
    T = resolvent_matrix(op, z)
    try:
        cond = T.check_invertible()
    except NearSpectrumError as exc:
        raise NearSpectrumError(f"z = {z} is numerically an eigenvalue of H", exc.condition) from None
    val = complex(T.column(l - op.a)[k - op.a])
    return (val, cond) if return_condition else val
