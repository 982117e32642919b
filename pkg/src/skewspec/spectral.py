"""Finite-volume spectra: tridiagonal and CMV eigenvalues, the integrated
density of states, and level-spacing statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .cmv import FiniteCMV
from .errors import ContractViolation
from .parallel import pmap, torus_samples
from .schrodinger import PotentialSpec, SchrodingerFiniteOp, schrodinger_operator
from .torus import SkewShiftMap, TorusPoint


def sturm_count(diag, off, energies) -> np.ndarray:
    """#{eigenvalues < E} of the real symmetric tridiagonal matrix, for each E.

    Counts negative pivots of the LDL^T factorisation of T - E.
    """
    diag = np.asarray(diag, dtype=float)
    off2 = np.asarray(off, dtype=float) ** 2
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    tiny = np.finfo(float).tiny * 1e3
    count = np.zeros(E.shape, dtype=np.int64)
    q = diag[0] - E
    for i in range(len(diag)):
        if i:
            q = (diag[i] - E) - off2[i - 1] / q
        q = np.where(q == 0.0, -tiny, q)
        count += q < 0
    return count


def eigs_symmetric_tridiag(op: SchrodingerFiniteOp) -> np.ndarray:
    """Sorted eigenvalues of H^{[a,b]}.

    Uses the LAPACK root-free QL iteration (?sterf); ``sturm_count`` is the
    independent check on counts.
    """
    if op.n > 2**20:
        raise ContractViolation("operator too large")
    if op.n == 1:
        return op.diagonal.copy()
    return eigvalsh_tridiagonal(op.diagonal, np.ones(op.n - 1), lapack_driver="sterf")


def cmv_eigenpairs(op: FiniteCMV) -> tuple[np.ndarray, np.ndarray]:
    w, V = np.linalg.eig(op.dense("E"))
    order = np.argsort(np.angle(w))
    return w[order], V[:, order]


def cmv_eigenvalues(op: FiniteCMV) -> np.ndarray:
    """Eigenvalues of the unitary E^{[a,b]}, sorted by argument."""
    w = np.linalg.eigvals(op.dense("E"))
    return w[np.argsort(np.angle(w))]


@dataclass(frozen=True)
class IDSTable:
    energies: np.ndarray
    k: np.ndarray
    N: int
    samples: int

    def __post_init__(self):
        if len(self.energies) != len(self.k):
            raise ContractViolation("energy grid and k values differ in length")
        if np.any(np.diff(self.energies) <= 0):
            raise ContractViolation("energy grid must be strictly increasing")
        if np.any(np.diff(self.k) < 0):
            raise ContractViolation("k must be nondecreasing")

    def at(self, E: float) -> float:
        return float(np.interp(E, self.energies, self.k))

    def rows(self):
        return zip(self.energies.tolist(), self.k.tolist())


def _counts_for(args):
    g, m, x, N, grid = args
    eigs = eigs_symmetric_tridiag(schrodinger_operator(PotentialSpec(g, m, TorusPoint(x)), 1, N))
    return np.searchsorted(eigs, grid, side="right")


def ids_estimate(spec: PotentialSpec, N: int, M: int, grid=512, seed: int = 0,
                 threads: int | None = None) -> IDSTable:
    """k_N(E) = (1/N) E_x #{eigenvalues of H^{[1,N]} <= E}, averaged over M seeded base points.

    ``grid`` is either a number of points spanning the Gershgorin range
    [-2 - 2g, 2 + 2g] or an explicit increasing energy array.  The base
    point stored in ``spec`` is not used; only g and the map are.
    """
    if N < 64 or M < 8:
        raise ContractViolation("need N >= 64 and M >= 8")
    if np.ndim(grid) == 0:
        R = 2.0 + 2.0 * spec.g
        grid = np.linspace(-R, R, int(grid))
    grid = np.asarray(grid, dtype=float)
    xs = torus_samples(seed, (N,), M, spec.map.r)
    counts = pmap(_counts_for, [(spec.g, spec.map, x, N, grid) for x in xs], threads)
    k = np.sum(counts, axis=0) / (N * M)
    return IDSTable(grid, k, N, M)


def zero_in_spectrum_check(spec: PotentialSpec, N_list) -> np.ndarray:
    """min |eigenvalue of H^{[1,N]}| for each N (base point from ``spec``)."""
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ContractViolation("N list must be increasing")
    return np.array([
        np.abs(eigs_symmetric_tridiag(schrodinger_operator(spec, 1, N))).min() for N in N_list
    ])


@dataclass(frozen=True)
class SpacingStats:
    gaps: np.ndarray
    mean: float
    variance: float
    cdf_grid: np.ndarray
    cdf: np.ndarray
    ks_poisson: float
    ks_clock: float


def ks_to_poisson(s: np.ndarray) -> float:
    s = np.sort(s)
    n = len(s)
    F = 1.0 - np.exp(-s)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_to_clock(s: np.ndarray, tol: float = 1e-9) -> float:
    """Distance to the step distribution at 1 (all gaps equal); |s - 1| <= tol counts as 1."""
    below = np.mean(s < 1.0 - tol)
    above = np.mean(s > 1.0 + tol)
    return float(max(below, above))


def spacing_from_spectra(spectra, N: int, center: float, halfwidth: float,
                         min_count: int = 50) -> SpacingStats:
    """Unfolded nearest-neighbour gaps of eigenvalues in [center - w, center + w].

    Each gap is multiplied by N times the local density of states; the
    density is a Gaussian-kernel estimate from all supplied spectra with a
    bandwidth of four mean level spacings in the window.
    """
    spectra = [np.sort(np.asarray(s, dtype=float)) for s in spectra]
    lo, hi = center - halfwidth, center + halfwidth
    inwin = [s[(s >= lo) & (s <= hi)] for s in spectra]
    count = sum(len(s) for s in inwin)
    if count < min_count:
        raise ContractViolation(
            f"only {count} eigenvalues in the window, need {min_count}; widen the window"
        )
    pooled = np.concatenate(spectra)
    mean_spacing = 2.0 * halfwidth * len(spectra) / count
    h = 4.0 * mean_spacing

    def density(E):
        u = (E[:, None] - pooled[None, :]) / h
        return np.exp(-0.5 * u * u).sum(axis=1) / (h * np.sqrt(2 * np.pi) * N * len(spectra))

    gaps = []
    for s in inwin:
        if len(s) < 2:
            continue
        mid = 0.5 * (s[1:] + s[:-1])
        gaps.append(np.diff(s) * N * density(mid))
    gaps = np.concatenate(gaps)
    grid = np.linspace(0.0, 4.0, 41)
    cdf = np.searchsorted(np.sort(gaps), grid, side="right") / len(gaps)
    return SpacingStats(gaps, float(gaps.mean()), float(gaps.var()), grid, cdf,
                        ks_to_poisson(gaps), ks_to_clock(gaps))


def spacing_stats(spec: PotentialSpec, N: int, center: float = 0.0, halfwidth: float = 0.5,
                  M: int = 1, seed: int = 0) -> SpacingStats:
    """Spacing statistics of H^{[1,N]}.  M = 1 uses the base point of ``spec``;
    M > 1 draws seeded base points."""
    if M == 1:
        points = [spec.x.coords]
    else:
        points = list(torus_samples(seed, (N, 7), M, spec.map.r))
    spectra = [eigs_symmetric_tridiag(
        schrodinger_operator(PotentialSpec(spec.g, spec.map, TorusPoint(x)), 1, N)) for x in points]
    return spacing_from_spectra(spectra, N, center, halfwidth)


def free_spec(r: int = 2, omega: float | None = None) -> PotentialSpec:
    """Zero coupling: H is the free Laplacian."""
    m = SkewShiftMap(r) if omega is None else SkewShiftMap(r, omega)
    return PotentialSpec(0.0, m, TorusPoint(np.zeros(r)))
