"""Skew-shift dynamics on the r-torus.

The map is

    (T x)_1 = x_1 + omega,   (T x)_l = x_l + x_{l-1}   (2 <= l <= r),

taken mod 1.  Orbits are generated by plain iteration with a mod-1
reduction after every step, which keeps rounding growth linear in the
number of steps.  Most functions accept either a :class:`TorusPoint` or a
float array whose last axis has length r, so that many starting points
can be advanced together.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ContractViolation

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TorusPoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.size < 1:
            raise ContractViolation("torus point needs r >= 1 coordinates")
        if np.any(c < 0.0) or np.any(c >= 1.0) or not np.all(np.isfinite(c)):
            raise ContractViolation(f"coordinates must lie in [0, 1): {c}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def wrap(cls, coords) -> "TorusPoint":
        """Build a point from arbitrary reals by reducing mod 1."""
        c = np.mod(np.asarray(coords, dtype=float).reshape(-1), 1.0)
        c[c >= 1.0] = 0.0
        return cls(c)

    @property
    def r(self) -> int:
        return self.coords.size

    def __len__(self):
        return self.coords.size


@dataclass(frozen=True)
class SkewShiftMap:
    r: int
    omega: float = GOLDEN

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise ContractViolation(f"dimension r must be a positive integer, got {self.r}")
        if not 0.0 <= self.omega < 1.0:
            raise ContractViolation(f"omega must lie in [0, 1), got {self.omega}")

    @property
    def rational(self) -> bool:
        """True if omega is within 1e-12 of a fraction with denominator <= 10^4."""
        frac = Fraction(self.omega).limit_denominator(10_000)
        return abs(float(frac) - self.omega) < 1e-12


def _as_array(m: SkewShiftMap, x) -> np.ndarray:
    arr = x.coords if isinstance(x, TorusPoint) else np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != m.r:
        raise ContractViolation(
            f"point has dimension {arr.shape[-1] if arr.ndim else 0}, map has r = {m.r}"
        )
    return arr


def _columns(arr: np.ndarray) -> list[np.ndarray]:
    return [np.array(arr[..., l], dtype=float) for l in range(arr.shape[-1])]


def _forward(cols: list[np.ndarray], omega: float) -> None:
    # update from the last coordinate down so each uses the old x_{l-1}
    for l in range(len(cols) - 1, 0, -1):
        cols[l] += cols[l - 1]
        np.mod(cols[l], 1.0, out=cols[l])
    cols[0] += omega
    np.mod(cols[0], 1.0, out=cols[0])


def _backward(cols: list[np.ndarray], omega: float) -> None:
    cols[0] -= omega
    np.mod(cols[0], 1.0, out=cols[0])
    for l in range(1, len(cols)):
        cols[l] -= cols[l - 1]
        np.mod(cols[l], 1.0, out=cols[l])


def _pack(cols, like):
    out = np.stack(cols, axis=-1)
    # np.mod can return exactly 1.0 for tiny negative inputs
    out[out >= 1.0] = 0.0
    if isinstance(like, TorusPoint):
        return TorusPoint(out)
    return out


def skew_shift_step(m: SkewShiftMap, x):
    """One application of T_omega."""
    cols = _columns(_as_array(m, x))
    _forward(cols, m.omega)
    return _pack(cols, x)


def inverse_step(m: SkewShiftMap, x):
    """One application of T_omega^{-1}: x_1 - omega, then x_l - y_{l-1} cascading."""
    cols = _columns(_as_array(m, x))
    _backward(cols, m.omega)
    return _pack(cols, x)


def orbit_coordinate(m: SkewShiftMap, x, n: int):
    """T^n x by n-fold iteration (negative n uses the explicit inverse)."""
    n = int(n)
    cols = _columns(_as_array(m, x))
    step = _forward if n >= 0 else _backward
    for _ in range(abs(n)):
        step(cols, m.omega)
    return _pack(cols, x)


def orbit(m: SkewShiftMap, x, start: int, stop: int) -> np.ndarray:
    """Array of T^n x for start <= n <= stop, shape (stop - start + 1, ..., r)."""
    if stop < start:
        raise ContractViolation(f"empty orbit range [{start}, {stop}]")
    arr = _as_array(m, x)
    cols = _columns(orbit_coordinate(m, arr, start))
    out = np.empty((stop - start + 1,) + arr.shape, dtype=float)
    for i in range(stop - start + 1):
        if i:
            _forward(cols, m.omega)
        for l, c in enumerate(cols):
            out[i, ..., l] = c
    out[out >= 1.0] = 0.0
    return out


def closed_form_r2(m: SkewShiftMap, x, n: int) -> np.ndarray:
    """Exact formula for r = 2: (x1 + n w, x2 + n x1 + w n(n-1)/2) mod 1.

    Used only as an independent check on :func:`orbit_coordinate`.
    """
    if m.r != 2:
        raise ContractViolation("closed form only available for r = 2")
    arr = _as_array(m, x)
    x1 = arr[..., 0]
    x2 = arr[..., 1]
    # split n(n-1)/2 * omega into exact integer part times omega, reduced
    tri = n * (n - 1) // 2
    c1 = np.mod(x1 + math.fmod(n * m.omega, 1.0), 1.0)
    c2 = np.mod(x2 + np.mod(n * x1, 1.0) + math.fmod(tri * m.omega, 1.0), 1.0)
    return np.stack([c1, c2], axis=-1)


@dataclass(frozen=True)
class DiophantineReport:
    kappa_lower: float
    q_max: int
    worst_q: int


def diophantine_quality(omega: float, q_max: int) -> DiophantineReport:
    """min over 1 <= q <= q_max of q^2 * dist(q omega, Z)."""
    if int(q_max) != q_max or q_max < 1:
        raise ContractViolation(f"q_max must be an integer >= 1, got {q_max}")
    q = np.arange(1, int(q_max) + 1, dtype=float)
    prod = q * omega
    dist = np.abs(prod - np.round(prod))
    vals = q * q * dist
    i = int(np.argmin(vals))
    return DiophantineReport(kappa_lower=float(vals[i]), q_max=int(q_max), worst_q=i + 1)


@dataclass(frozen=True)
class BallRegion:
    """Closed sup-metric ball on the torus.  Radii >= 1/2 cover everything."""

    center: TorusPoint
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ContractViolation(f"ball radius must be positive, got {self.radius}")

    @property
    def measure(self) -> float:
        return min(2.0 * self.radius, 1.0) ** self.center.r

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.radius >= 0.5:
            return np.ones(pts.shape[:-1], dtype=bool)
        d = np.abs(pts - self.center.coords) % 1.0
        d = np.minimum(d, 1.0 - d)
        return np.all(d <= self.radius, axis=-1)


@dataclass(frozen=True)
class ReturnTimeStats:
    horizon: int
    hits: int
    frequency: float
    target_measure: float


def count_hits(m: SkewShiftMap, xs, region: BallRegion, L: int, chunk: int = 4096) -> np.ndarray:
    """Hits #{1 <= l <= L : T^l x in region} for every starting point in xs."""
    if L < 1:
        raise ContractViolation(f"horizon L must be >= 1, got {L}")
    arr = _as_array(m, xs)
    cols = _columns(arr)
    hits = np.zeros(arr.shape[:-1], dtype=np.int64)
    buf = np.empty((chunk,) + arr.shape, dtype=float)
    done = 0
    while done < L:
        k = min(chunk, L - done)
        for i in range(k):
            _forward(cols, m.omega)
            for l, c in enumerate(cols):
                buf[i, ..., l] = c
        hits += region.contains(buf[:k]).sum(axis=0)
        done += k
    return hits


def return_time_count(m: SkewShiftMap, x, region: BallRegion, L: int) -> ReturnTimeStats:
    hits = int(count_hits(m, _as_array(m, x), region, L))
    return ReturnTimeStats(horizon=int(L), hits=hits, frequency=hits / L,
                           target_measure=region.measure)


def discrepancy_exponent(m: SkewShiftMap, xs, region: BallRegion, horizons) -> tuple[float, np.ndarray]:
    """Fit |hits - |B| L| ~ L^e over the given horizons, median over starts.

    The exponent of the return-time bound is not known in closed form, so
    this only reports the empirical value.
    """
    horizons = np.asarray(sorted(horizons))
    errs = np.array([
        np.median(np.abs(count_hits(m, xs, region, int(L)) - region.measure * L))
        for L in horizons
    ])
    good = errs > 0
    if good.sum() < 2:
        return float("nan"), errs
    slope = np.polyfit(np.log(horizons[good]), np.log(errs[good]), 1)[0]
    return float(slope), errs
