"""Transfer-matrix cocycles and Lyapunov exponents.

Schrodinger step at site n:  [[E - V(n), -1], [1, 0]].
Szego step at site n:        (1/rho_n) [[z, -conj(alpha_n)], [-z alpha_n, 1]].

Products are formed in blocks of 32 steps (vectorised across blocks and
samples), then folded sequentially with a Frobenius renormalisation after
every block.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .parallel import pmap, resolve_threads, torus_samples
from .sampling import SamplingFunction
from .schrodinger import sampling_f
from .spectral import IDSTable
from .torus import SkewShiftMap, orbit

RENORM = 32
CHUNK = 4096  # steps of orbit held in memory at once; a multiple of RENORM


@dataclass(frozen=True)
class TransferStep:
    kind: str
    matrix: np.ndarray


def schrodinger_matrices(E: float, V) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    out = np.zeros(V.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = E - V
    out[..., 0, 1] = -1.0
    out[..., 1, 0] = 1.0
    return out


def szego_matrices(z: complex, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=complex)
    mod2 = np.abs(alpha) ** 2
    if np.any(~np.isfinite(mod2)) or np.any(mod2 >= 1.0):
        raise ContractViolation("Verblunsky coefficient outside the open unit disk")
    rho = np.sqrt(1.0 - mod2)
    out = np.empty(alpha.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = z / rho
    out[..., 0, 1] = -np.conj(alpha) / rho
    out[..., 1, 0] = -z * alpha / rho
    out[..., 1, 1] = 1.0 / rho
    return out


def cocycle_step(kind: str, *, E: float | None = None, V: float = 0.0,
                 z: complex | None = None, alpha: complex = 0.0) -> TransferStep:
    if kind == "schrodinger":
        if E is None:
            raise ContractViolation("schrodinger step needs an energy E")
        return TransferStep(kind, schrodinger_matrices(E, V))
    if kind == "szego":
        if z is None:
            raise ContractViolation("szego step needs a spectral parameter z")
        return TransferStep(kind, szego_matrices(z, alpha))
    raise ContractViolation(f"unknown cocycle kind {kind!r}")


def block_products(mats: np.ndarray) -> np.ndarray:
    """mats (n, ...) with n a multiple of RENORM -> (n / RENORM, ...) ordered products
    M_{j+31} ... M_j of each block."""
    n = mats.shape[0]
    blocks = mats.reshape((n // RENORM, RENORM) + mats.shape[1:])
    P = blocks[:, 0].copy()
    for j in range(1, RENORM):
        P = blocks[:, j] @ P
    return P


def fold(blocks: np.ndarray, state: np.ndarray, logs: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Left-multiply ``state`` (..., 2, 2) by each block in turn, renormalising
    after each; returns the new state, accumulated log norms and #renormalisations."""
    for B in blocks:
        state = B @ state
        s = np.sqrt(np.sum(np.abs(state) ** 2, axis=(-2, -1)))
        state = state / s[..., None, None]
        logs = logs + np.log(s)
    return state, logs, len(blocks)


def log_product_norm(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """For mats (N, ..., 2, 2): log ||M_{N-1} ... M_0||_F and the unit-norm product."""
    N = mats.shape[0]
    batch = mats.shape[1:-2]
    state = np.broadcast_to(np.eye(2, dtype=complex), batch + (2, 2)).copy()
    logs = np.zeros(batch)
    full = N - N % RENORM
    count = 0
    if full:
        state, logs, count = fold(block_products(mats[:full]), state, logs)
    if N > full:
        state, logs, c = fold(_tail_product(mats[full:])[None], state, logs)
        count += c
    return logs, state, count


def _tail_product(mats: np.ndarray) -> np.ndarray:
    P = mats[0].copy()
    for j in range(1, mats.shape[0]):
        P = mats[j] @ P
    return P


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    steps: int
    samples: int
    std_error: float
    renorm_count: int
    per_sample: tuple = ()

    def to_row(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "N": self.steps,
                "M": self.samples, "renorm_count": self.renorm_count}


@dataclass(frozen=True)
class CocycleSpec:
    """What generates the site data along an orbit of the skew-shift.

    kind "szego": alpha_n = f(T^n x) at spectral parameter z.
    kind "schrodinger": V(n) = g * (cos 2 pi x_r - cos 2 pi (x_r + x_{r-1})) at T^n x,
    at energy E; ``potential`` overrides the default sampling function.
    """
    kind: str
    map: SkewShiftMap
    f: SamplingFunction | None = None
    z: complex = 1.0
    g: float = 0.0
    E: float = 0.0
    potential: object = None

    def __post_init__(self):
        if self.kind not in ("szego", "schrodinger"):
            raise ContractViolation(f"unknown cocycle kind {self.kind!r}")
        if self.kind == "szego" and self.f is None:
            raise ContractViolation("szego cocycle needs a sampling function")
        for v in (self.z, self.g, self.E):
            if not np.isfinite(v):
                raise ContractViolation("non-finite cocycle parameter")

    def matrices(self, pts: np.ndarray) -> np.ndarray:
        if self.kind == "szego":
            return szego_matrices(self.z, self.f(pts))
        pot = self.potential if self.potential is not None else sampling_f
        return schrodinger_matrices(self.E, self.g * pot(pts))


def _run_chunked(spec: CocycleSpec, xs: np.ndarray, N: int) -> tuple[np.ndarray, int, np.ndarray]:
    """log norms of the N-step product (sites 1..N) for base points xs (M, r),
    the renormalisation count and the end points T^N xs."""
    M = xs.shape[0]
    state = np.broadcast_to(np.eye(2, dtype=complex), (M, 2, 2)).copy()
    logs = np.zeros(M)
    count = 0
    cur = xs.copy()
    done = 0
    while done < N:
        n = min(CHUNK, N - done)
        pts = orbit(spec.map, cur, 1, n)  # (n, M, r): T^1 cur ... T^n cur
        mats = spec.matrices(pts)
        cur = pts[-1]
        full = n - n % RENORM
        if full:
            state, logs, c = fold(block_products(mats[:full]), state, logs)
            count += c
        if n > full:
            state, logs, c = fold(_tail_product(mats[full:])[None], state, logs)
            count += c
        done += n
    return logs, count, cur


def lyapunov_estimate(spec: CocycleSpec, M: int, N: int, seed: int = 0, mode: str = "sampling",
                      x0=None, threads: int | None = None) -> LyapunovEstimate:
    """E_x (1/N) log ||A_N(x)|| over M seeded base points.

    mode "orbit" instead follows one orbit from ``x0`` and splits it into
    M consecutive segments of N steps.
    """
    if N < 1000:
        raise ContractViolation("need N >= 1000 steps")
    if M < 1:
        raise ContractViolation("need M >= 1 samples")
    if mode == "sampling":
        xs = torus_samples(seed, (N,), M, spec.map.r)
        k = min(resolve_threads(threads), M)
        groups = np.array_split(np.arange(M), k)
        parts = pmap(lambda idx: _run_chunked(spec, xs[idx], N), groups, k)
        logs = np.concatenate([p[0] for p in parts])
        count = parts[0][1]
    elif mode == "orbit":
        if x0 is None:
            raise ContractViolation("orbit mode needs a starting point x0")
        cur = np.asarray(x0, dtype=float).reshape(1, -1)
        vals, count = [], 0
        for _ in range(M):
            l, count, cur = _run_chunked(spec, cur, N)
            vals.append(l[0])
        logs = np.array(vals)
    else:
        raise ContractViolation(f"unknown mode {mode!r}")
    per = logs / N
    if not np.all(np.isfinite(per)):
        raise ContractViolation("non-finite log norm; check inputs")
    std = float(per.std(ddof=1) / np.sqrt(M)) if M > 1 else 0.0
    return LyapunovEstimate(float(per.mean()), N, M, std, count, tuple(per.tolist()))


def _log_abs_antiderivative(u: np.ndarray) -> np.ndarray:
    """F(u) = u log|u| - u, with F(0) = 0."""
    au = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(au > 0, u * np.log(np.where(au > 0, au, 1.0)) - u, 0.0)
    return out


def thouless_L(ids: IDSTable, E: float) -> float:
    """integral of log|E - t| dk(t).

    The mass k(t_i) - k(t_{i-1}) of each grid bin is spread uniformly over the
    bin and log|E - t| is averaged over the bin exactly, which handles the
    logarithmic singularity at t = E.
    """
    t = ids.energies
    if not t[0] <= E <= t[-1]:
        raise ContractViolation(f"E = {E} outside the IDS grid [{t[0]}, {t[-1]}]")
    dk = np.diff(ids.k)
    F = _log_abs_antiderivative(t - E)
    avg = np.diff(F) / np.diff(t)
    total = float(np.dot(dk, avg))
    if ids.k[0] > 0:
        d = abs(E - t[0])
        total += float(ids.k[0]) * (np.log(d) if d > 0 else -np.inf)
    return total
