"""Sampling functions, Verblunsky paths and trigonometric approximation.

A sampling function f on the torus produces Verblunsky coefficients
alpha_n = f(T^n x) along a skew-shift orbit.  Two kinds are supported:
the canonical f(x) = lam * e(x_r) and explicit trigonometric polynomials
given by a finite coefficient table.  The analyticity width ``w`` is only
carried as metadata.

The approximation part builds, for fixed n, trigonometric polynomials
p1 ~ alpha_{x;n} and p2 ~ rho_{x;n} = sqrt(1 - |alpha_{x;n}|^2) and
measures their sup error on a dyadic grid.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, GeneratorInvalid
from .torus import SkewShiftMap, TorusPoint, orbit, orbit_coordinate

TWO_PI = 2.0 * np.pi


def _lift_matrix_power(r: int, n: int) -> np.ndarray:
    """Integer matrix A^n with A the linear part of the lifted skew-shift."""
    A = np.eye(r, dtype=object)
    for l in range(1, r):
        A[l, l - 1] = 1
    if n < 0:
        # (I + S)^{-1} = sum_k (-S)^k, S nilpotent
        S = A - np.eye(r, dtype=object)
        inv = np.eye(r, dtype=object)
        term = np.eye(r, dtype=object)
        for _ in range(1, r):
            term = term.dot(-S)
            inv = inv + term
        A = inv
    out = np.eye(r, dtype=object)
    for _ in range(abs(n)):
        out = A.dot(out)
    return out


class TrigPolynomial:
    """Finite Fourier series  g(x) = sum_k c_k e(k . x)  on the r-torus.

    Coefficients are stored as a sorted integer key array of shape (nk, r)
    and a complex value array; duplicate keys are merged on construction.
    """

    def __init__(self, keys, values, r: int | None = None):
        keys = np.asarray(keys, dtype=np.int64)
        values = np.asarray(values, dtype=complex).reshape(-1)
        if keys.size == 0:
            if r is None:
                raise ContractViolation("empty polynomial needs an explicit r")
            keys = np.zeros((0, r), dtype=np.int64)
        if keys.ndim != 2 or len(keys) != len(values):
            raise ContractViolation("keys must be an (nk, r) array matching values")
        r = keys.shape[1] if r is None else r
        if keys.shape[1] != r:
            raise ContractViolation(f"keys have dimension {keys.shape[1]}, expected {r}")
        if keys.shape[0]:
            uniq, inv = np.unique(keys, axis=0, return_inverse=True)
            vals = np.zeros(len(uniq), dtype=complex)
            np.add.at(vals, inv.reshape(-1), values)
            keys, values = uniq, vals
        self.keys = keys
        self.values = values
        self.r = int(r)

    @classmethod
    def from_dict(cls, coeffs: dict, r: int | None = None) -> "TrigPolynomial":
        if not coeffs:
            return cls(np.zeros((0, r or 1)), [], r=r or 1)
        keys = [tuple(int(v) for v in k) for k in coeffs]
        return cls(keys, [complex(coeffs[k]) for k in coeffs], r=r)

    @classmethod
    def constant(cls, c: complex, r: int) -> "TrigPolynomial":
        return cls(np.zeros((1, r), dtype=np.int64), [c], r=r)

    @property
    def coeffs(self) -> dict:
        return {tuple(int(v) for v in k): complex(c) for k, c in zip(self.keys, self.values)}

    @property
    def degree(self) -> int:
        nz = self.values != 0
        if not nz.any():
            return 0
        return int(np.abs(self.keys[nz]).max())

    def __call__(self, pts, chunk: int = 4096) -> np.ndarray:
        pts = pts.coords if isinstance(pts, TorusPoint) else np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, self.r)
        out = np.zeros(len(flat), dtype=complex)
        kf = self.keys.astype(float)
        for s in range(0, len(flat), chunk):
            ph = flat[s:s + chunk] @ kf.T
            out[s:s + chunk] = np.exp(1j * TWO_PI * ph) @ self.values
        return out.reshape(pts.shape[:-1])

    def truncate(self, D: int) -> "TrigPolynomial":
        keep = np.abs(self.keys).max(axis=1, initial=0) <= D if len(self.keys) else np.zeros(0, bool)
        return TrigPolynomial(self.keys[keep], self.values[keep], r=self.r)

    def conj(self) -> "TrigPolynomial":
        return TrigPolynomial(-self.keys, np.conj(self.values), r=self.r)

    def __add__(self, other):
        if not isinstance(other, TrigPolynomial):
            other = TrigPolynomial.constant(complex(other), self.r)
        return TrigPolynomial(np.vstack([self.keys, other.keys]),
                              np.concatenate([self.values, other.values]), r=self.r)

    __radd__ = __add__

    def __mul__(self, other):
        if not isinstance(other, TrigPolynomial):
            return TrigPolynomial(self.keys, self.values * complex(other), r=self.r)
        if len(self.keys) == 0 or len(other.keys) == 0:
            return TrigPolynomial(np.zeros((0, self.r)), [], r=self.r)
        keys = (self.keys[:, None, :] + other.keys[None, :, :]).reshape(-1, self.r)
        vals = (self.values[:, None] * other.values[None, :]).reshape(-1)
        return TrigPolynomial(keys, vals, r=self.r)

    __rmul__ = __mul__

    def prune(self, tol: float = 0.0) -> "TrigPolynomial":
        keep = np.abs(self.values) > tol
        return TrigPolynomial(self.keys[keep], self.values[keep], r=self.r)

    def compose_lift(self, m: SkewShiftMap, n: int) -> "TrigPolynomial":
        """The polynomial x -> g(T~^n x), T~ the lifted skew-shift.

        T~^n x = A^n x + b with A^n an integer matrix, so every monomial
        e(k.x) maps to e(k.b) e(((A^n)^T k).x).  b mod 1 is T^n(0).
        """
        if m.r != self.r:
            raise ContractViolation(f"map has r = {m.r}, polynomial has r = {self.r}")
        An = _lift_matrix_power(self.r, int(n))
        shift = orbit_coordinate(m, np.zeros(self.r), int(n))
        new_keys = np.array(
            [[int(v) for v in An.T.dot([int(t) for t in k])] for k in self.keys], dtype=object
        ).reshape(-1, self.r)
        if len(new_keys) and np.abs(new_keys).max() > 2**62:
            raise OverflowError("composed lattice indices exceed int64")
        phase = np.exp(1j * TWO_PI * (self.keys.astype(float) @ shift)) if len(self.keys) else 1.0
        return TrigPolynomial(new_keys.astype(np.int64), self.values * phase, r=self.r)

    def grid_sup(self, points_per_dim: int = 128) -> float:
        return float(np.abs(self(dyadic_grid(self.r, points_per_dim))).max(initial=0.0))

    def lipschitz_slack(self, points_per_dim: int = 128) -> float:
        """Bound on sup - grid_sup from  sum |c_k| 2 pi |k|_1  times half the spacing."""
        lip = TWO_PI * float(np.sum(np.abs(self.values) * np.abs(self.keys).sum(axis=1)))
        return lip * 0.5 / points_per_dim

    def to_json(self) -> str:
        table = {",".join(str(int(v)) for v in k): [float(c.real), float(c.imag)]
                 for k, c in zip(self.keys, self.values)}
        return json.dumps({"r": self.r, "coeffs": table}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrigPolynomial":
        obj = json.loads(text)
        r = int(obj["r"])
        coeffs = {tuple(int(v) for v in k.split(",")): complex(c[0], c[1])
                  for k, c in obj["coeffs"].items()}
        return cls.from_dict(coeffs, r=r)

    def __eq__(self, other):
        if not isinstance(other, TrigPolynomial):
            return NotImplemented
        return (self.r == other.r and np.array_equal(self.keys, other.keys)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"TrigPolynomial(r={self.r}, degree={self.degree}, terms={len(self.values)})"


def dyadic_grid(r: int, points_per_dim: int) -> np.ndarray:
    axis = np.arange(points_per_dim) / points_per_dim
    mesh = np.meshgrid(*([axis] * r), indexing="ij")
    return np.stack([g.reshape(-1) for g in mesh], axis=-1)


@dataclass(frozen=True)
class SamplingFunction:
    """Either canonical ``lam * e(x_r)`` or an explicit trigonometric polynomial."""

    kind: str
    lam: complex = 0.0
    poly: TrigPolynomial | None = field(default=None, compare=False)
    width: float = 1.0

    def __post_init__(self):
        if self.kind == "canonical":
            if not abs(self.lam) < 1:
                raise ContractViolation(f"canonical generator needs |lambda| < 1, got {self.lam}")
        elif self.kind == "trig_poly":
            if self.poly is None:
                raise ContractViolation("trig_poly kind needs a coefficient table")
            sup = self.poly.grid_sup(64)
            if not sup < 1:
                raise ContractViolation(f"sup over the 64^r grid is {sup:.6g} >= 1")
        else:
            raise ContractViolation(f"unknown sampling kind {self.kind!r}")
        if not self.width > 0:
            raise ContractViolation("analyticity width must be positive")

    @classmethod
    def canonical(cls, lam: complex) -> "SamplingFunction":
        return cls("canonical", lam=complex(lam))

    @classmethod
    def trig_poly(cls, poly: TrigPolynomial, width: float = 1.0) -> "SamplingFunction":
        return cls("trig_poly", poly=poly, width=width)

    def __call__(self, pts) -> np.ndarray:
        pts = pts.coords if isinstance(pts, TorusPoint) else np.asarray(pts, dtype=float)
        if self.kind == "canonical":
            return self.lam * np.exp(1j * TWO_PI * pts[..., -1])
        return self.poly(pts)

    def fourier(self, r: int) -> TrigPolynomial:
        if self.kind == "canonical":
            key = np.zeros((1, r), dtype=np.int64)
            key[0, -1] = 1
            return TrigPolynomial(key, [self.lam], r=r)
        if self.poly.r != r:
            raise ContractViolation(f"polynomial has r = {self.poly.r}, asked for {r}")
        return self.poly


def decaying_test_function(q: float, scale: float, directions, degree: int) -> SamplingFunction:
    """f(x) = scale * sum_d sum_{|m| <= degree} q^|m| e(m d.x).

    Along each integer direction d the coefficients decay like q^|m|; the
    untruncated series is a sum of Poisson kernels, which tests use as an
    independent closed form.
    """
    directions = [tuple(int(v) for v in d) for d in directions]
    r = len(directions[0])
    ms = np.arange(-degree, degree + 1)
    keys = np.concatenate([np.outer(ms, d) for d in directions])
    vals = np.tile(scale * q ** np.abs(ms), len(directions))
    return SamplingFunction.trig_poly(TrigPolynomial(keys, vals, r=r), width=-math.log(q) / TWO_PI)


def lattice_decay_function(q: float, scale: float, r: int, degree: int) -> SamplingFunction:
    """f(x) = scale * sum_{|k|_inf <= degree} q^{|k|_inf} e(k.x)."""
    axis = np.arange(-degree, degree + 1)
    mesh = np.meshgrid(*([axis] * r), indexing="ij")
    keys = np.stack([g.reshape(-1) for g in mesh], axis=-1)
    vals = scale * q ** np.abs(keys).max(axis=1)
    return SamplingFunction.trig_poly(TrigPolynomial(keys, vals, r=r), width=-math.log(q) / TWO_PI)


@dataclass(frozen=True)
class VerblunskyPath:
    a: int
    b: int
    alphas: np.ndarray
    rhos: np.ndarray

    def __post_init__(self):
        if self.b < self.a:
            raise ContractViolation(f"empty interval [{self.a}, {self.b}]")
        if len(self.alphas) != self.b - self.a + 1:
            raise ContractViolation("alphas length does not match the interval")

    @classmethod
    def from_alphas(cls, a: int, alphas) -> "VerblunskyPath":
        alphas = np.asarray(alphas, dtype=complex).reshape(-1)
        mod = np.abs(alphas)
        bad = np.flatnonzero(~(mod < 1))
        if bad.size:
            raise GeneratorInvalid(a + int(bad[0]), alphas[bad[0]])
        return cls(a, a + len(alphas) - 1, alphas, np.sqrt(1.0 - mod**2))

    def __len__(self):
        return self.b - self.a + 1

    def alpha(self, n: int) -> complex:
        return self.alphas[n - self.a]

    def window(self, c: int, d: int) -> "VerblunskyPath":
        if not (self.a <= c <= d <= self.b):
            raise ContractViolation(f"[{c}, {d}] not inside [{self.a}, {self.b}]")
        return VerblunskyPath(c, d, self.alphas[c - self.a:d - self.a + 1],
                              self.rhos[c - self.a:d - self.a + 1])


def verblunsky_path(f: SamplingFunction, m: SkewShiftMap, x, a: int, b: int) -> VerblunskyPath:
    """alpha_n = f(T^n x), rho_n = sqrt(1 - |alpha_n|^2) for a <= n <= b."""
    if b < a:
        raise ContractViolation(f"need a <= b, got [{a}, {b}]")
    pts = orbit(m, x, a, b)
    return VerblunskyPath.from_alphas(a, f(pts))


def sqrt_taylor_coefficients(N: int) -> np.ndarray:
    """c_n = (2n)! / ((1 - 2n) (n!)^2 4^n), n = 0..N, via c_n = c_{n-1} (2n-3)/(2n)."""
    c = np.empty(N + 1)
    c[0] = 1.0
    for n in range(1, N + 1):
        c[n] = c[n - 1] * (2 * n - 3) / (2 * n)
    return c


def sqrt_taylor(x, N: int):
    """Partial sum of the Taylor series of sqrt(1 - x) through x^N.

    For |x| <= r0 < 1 the error is at most r0^N / (1 - r0).
    """
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) >= 1):
        raise ContractViolation(f"sqrt Taylor series needs |x| < 1, got {x}")
    if N < 0:
        raise ContractViolation("N must be >= 0")
    c = sqrt_taylor_coefficients(N)
    out = np.zeros_like(xa)
    for cn in c[::-1]:
        out = out * xa + cn
    return float(out) if out.ndim == 0 else out


def sqrt_taylor_bound(r0: float, N: int) -> float:
    return r0**N / (1.0 - r0)


@dataclass(frozen=True)
class ApproxReport:
    alpha_error: float
    rho_error: float
    alpha_degree: int
    rho_degree: int
    taylor_terms: int
    grid: int


def rho_poly_approx(f: SamplingFunction, m: SkewShiftMap, n: int, D: int, grid: int = 128):
    """Trigonometric approximants of alpha_{x;n} and rho_{x;n}.

    p1 is the degree-D Fourier truncation of f composed with T~^n.  For rho
    the truncation degree is floor(sqrt(D)); with q1 that polynomial,
    p2 = sum_{j <= floor(sqrt D)} c_j |q1|^{2j}.  Returns (p1, p2, report).
    """
    if D < 0:
        raise ContractViolation("D must be >= 0")
    J = math.isqrt(D)
    fhat = f.fourier(m.r)
    pts = dyadic_grid(m.r, grid)
    r0 = float(np.abs(f(pts)).max())
    q1_base = fhat.truncate(J)
    sup_q1 = float(np.abs(q1_base(pts)).max())
    if not sup_q1 <= (1.0 + r0) / 2.0 < 1.0:
        raise ContractViolation(
            f"truncated sampling function reaches {sup_q1:.6g} > (1 + r0)/2 = {(1 + r0) / 2:.6g}"
        )
    p1 = fhat.truncate(D).compose_lift(m, n)
    q1 = q1_base.compose_lift(m, n)
    mod2 = (q1 * q1.conj()).prune(1e-300)
    c = sqrt_taylor_coefficients(J)
    p2 = TrigPolynomial.constant(c[J], m.r)
    for cj in c[-2::-1]:
        p2 = (p2 * mod2 + cj).prune(1e-300)

    alpha_true = f(orbit_coordinate(m, pts, n))
    rho_true = np.sqrt(1.0 - np.abs(alpha_true) ** 2)
    report = ApproxReport(
        alpha_error=float(np.abs(p1(pts) - alpha_true).max()),
        rho_error=float(np.abs(p2(pts) - rho_true).max()),
        alpha_degree=p1.degree,
        rho_degree=p2.degree,
        taylor_terms=J,
        grid=grid,
    )
    return p1, p2, report
