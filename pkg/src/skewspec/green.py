"""Green's functions and the (gamma, Gamma, p)-suitability classifier.

For CMV operators the Green's function is the inverse of the tridiagonal
A(z) = z L^* - M; for Schrodinger operators it is (H - z)^{-1}.  Since
A(z) = L^* (z - E) with L unitary, both conditions of suitability can be
read off A(z) directly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .cmv import FiniteCMV, assemble_finite_cmv, tridiagonal_A
from .errors import ContractViolation, NearSpectrumError, NotApplicable
from .sampling import VerblunskyPath
from .schrodinger import SchrodingerFiniteOp, resolvent_matrix
from .tridiag import Tridiagonal

LOG2 = math.log(2.0)
DENSE_SVD_LIMIT = 513


@dataclass(frozen=True)
class SuitabilityParams:
    gamma: float
    Gamma: float
    p: int

    def __post_init__(self):
        if self.gamma < 0 or self.Gamma < 0 or self.p < 0 or int(self.p) != self.p:
            raise ContractViolation(f"invalid suitability parameters {self}")

    @property
    def degenerate(self) -> bool:
        """gamma = 0 or Gamma = 0 is outside the meaningful range but still computable."""
        return self.gamma == 0 or self.Gamma == 0

    def lowered(self, by: int = 1) -> "SuitabilityParams":
        return SuitabilityParams(self.gamma, self.Gamma, self.p - by)


@dataclass(frozen=True)
class SuitabilityVerdict:
    N: int
    z: complex
    params: SuitabilityParams
    norm_ok: bool
    decay_ok: bool
    worst_pair: tuple[int, int] | None
    margin: float
    inverse_norm: float

    @property
    def suitable(self) -> bool:
        return self.norm_ok and self.decay_ok

    def to_record(self) -> dict:
        return {
            "N": self.N,
            "z": [float(np.real(self.z)), float(np.imag(self.z))],
            "gamma": self.params.gamma,
            "Gamma": self.params.Gamma,
            "p": self.params.p,
            "suitable": self.suitable,
            "margin": self.margin,
            "worst_pair": list(self.worst_pair) if self.worst_pair else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def _operator_matrix(op, z) -> tuple[Tridiagonal, int, int]:
    if isinstance(op, FiniteCMV):
        return tridiagonal_A(op, z, certify=False), op.a, op.b
    if isinstance(op, SchrodingerFiniteOp):
        return resolvent_matrix(op, z), op.a, op.b
    raise ContractViolation(f"unsupported operator type {type(op).__name__}")


def green_entry_cmv(op: FiniteCMV, z: complex, k: int, l: int) -> complex:
    """<delta_k, (z L^* - M)^{-1} delta_l> on [a, b]."""
    if not (op.a <= k <= op.b and op.a <= l <= op.b):
        raise ContractViolation(f"sites ({k}, {l}) outside [{op.a}, {op.b}]")
    T = tridiagonal_A(op, z, certify=False)
    T.check_invertible()
    return complex(T.column(l - op.a)[k - op.a])


def green_matrix(op, z: complex) -> np.ndarray:
    """All Green's function entries on the operator's interval."""
    T, _, _ = _operator_matrix(op, z)
    T.check_invertible()
    return T.inverse()


def resolvent_norm(T: Tridiagonal, rtol: float = 1e-10, maxiter: int = 500) -> float:
    """||T^{-1}||_2.

    Dense singular values for small matrices; otherwise power iteration on
    T^{-*} T^{-1} using the tridiagonal LU.
    """
    if T.n <= DENSE_SVD_LIMIT:
        s = sla.svdvals(T.dense())
        smin = s[-1]
        if smin == 0:
            raise NearSpectrumError("singular matrix", float("inf"))
        return float(1.0 / smin)
    T.check_invertible()
    rng = np.random.default_rng(0)
    v = rng.standard_normal(T.n) + 1j * rng.standard_normal(T.n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(maxiter):
        w = T.solve(v)
        u = T.solve(w, trans="C")
        new = math.sqrt(float(np.vdot(v, u).real))
        v = u / np.linalg.norm(u)
        if abs(new - est) <= rtol * new:
            return new
        est = new
    return est


def suitability_classify(op, z: complex, params: SuitabilityParams) -> SuitabilityVerdict:
    """Classify [-N, N] as (gamma, Gamma, p)-suitable or not.

    (1)  ||inverse|| <= 2^{-p} e^Gamma
    (2)  |G(k, l)| <= 2^{-(p+1)} e^{-gamma |k - l|}   for |k - l| >= N/2

    Both are compared in log form; ``margin`` is the smallest log-slack.
    """
    T, a, b = _operator_matrix(op, z)
    if a != -b:
        raise ContractViolation(f"interval [{a}, {b}] is not of the form [-N, N]")
    N = b
    inv_norm = resolvent_norm(T)
    norm_slack = params.Gamma - params.p * LOG2 - math.log(inv_norm)

    G = T.inverse()
    sites = np.arange(a, b + 1)
    dist = np.abs(sites[:, None] - sites[None, :])
    mask = dist >= N / 2.0
    with np.errstate(divide="ignore"):
        logG = np.log(np.abs(G))
    slack = -(params.p + 1) * LOG2 - params.gamma * dist - logG
    if mask.any():
        masked = np.where(mask, slack, np.inf)
        idx = np.unravel_index(int(np.argmin(masked)), masked.shape)
        decay_slack = float(masked[idx])
    else:
        idx, decay_slack = None, math.inf
    decay_ok = decay_slack >= 0
    worst = None if decay_ok or idx is None else (int(sites[idx[0]]), int(sites[idx[1]]))
    return SuitabilityVerdict(
        N=int(N), z=complex(z), params=params,
        norm_ok=bool(norm_slack >= 0), decay_ok=bool(decay_ok), worst_pair=worst,
        margin=float(min(norm_slack, decay_slack)), inverse_norm=inv_norm,
    )


def perturb_suitability_margin(params: SuitabilityParams, interval_len: int) -> float:
    """Allowed perturbation size e^{-(2 Gamma + gamma |b - a|)} for alpha and z."""
    return math.exp(-(2.0 * params.Gamma + params.gamma * interval_len))


def resolvent_distance_check(op: FiniteCMV, z: complex) -> tuple[float, float]:
    """(max |G(z; k, l)|, 1 / dist(z, spec E)).  The first never exceeds the second."""
    from .spectral import cmv_eigenvalues

    delta = float(np.abs(cmv_eigenvalues(op) - z).min())
    G = green_matrix(op, z)
    return float(np.abs(G).max()), (math.inf if delta == 0 else 1.0 / delta)


def _pieces(a: int, b: int, c: int, d: int) -> list[tuple[int, int]]:
    out = []
    if c > a:
        out.append((a, c - 1))
    if d < b:
        out.append((d + 1, b))
    return out


@dataclass(frozen=True)
class RestrictionReport:
    residual: float
    relative_residual: float
    cross_block_max: float
    empirical_constant: float


def restriction_identity_check(opA: FiniteCMV, opB: FiniteCMV, z: complex) -> RestrictionReport:
    """Check  A^{-1} - (A1 + B)^{-1} = A^{-1} Gamma (A1 + B)^{-1}.

    A = A(z) on [a, b], B = A(z) on [c, d] with its own boundary phases,
    A1 the restriction of A to [a, b] minus [c, d], Gamma = (A1 + B) - A.
    Also measures the constant C in
        |G_[a,b](k, l)| <= C sup_m |G_[c,d](k, m)| sup_n |G_[a,b](n, l)|
    for k in [c, d], l outside, m in {c, c+1, d-1, d}, n in {c-1, ..., d+1}.
    """
    a, b, c, d = opA.a, opA.b, opB.a, opB.b
    if not (a <= c <= d <= b):
        raise ContractViolation(f"[{c}, {d}] is not inside [{a}, {b}]")
    if not np.allclose(opA.path.window(c, d).alphas[:-1], opB.path.alphas[:-1], rtol=0, atol=0):
        raise ContractViolation("inner operator does not use the outer Verblunsky data")
    A = tridiagonal_A(opA, z, certify=False).dense()
    TB = tridiagonal_A(opB, z, certify=False)
    n = b - a + 1
    block = np.zeros((n, n), dtype=complex)
    block_inv = np.zeros((n, n), dtype=complex)
    TB.check_invertible()
    sl = slice(c - a, d - a + 1)
    block[sl, sl] = TB.dense()
    block_inv[sl, sl] = TB.inverse()
    for (s, t) in _pieces(a, b, c, d):
        ps = slice(s - a, t - a + 1)
        sub = A[ps, ps]
        Tsub = Tridiagonal(np.diag(sub, -1), np.diag(sub), np.diag(sub, 1))
        try:
            Tsub.check_invertible()
        except NearSpectrumError as exc:
            raise NearSpectrumError(f"outer piece [{s}, {t}] is singular", exc.condition) from None
        block[ps, ps] = sub
        block_inv[ps, ps] = Tsub.inverse()
    TA = Tridiagonal(np.diag(A, -1), np.diag(A), np.diag(A, 1))
    TA.check_invertible()
    A_inv = TA.inverse()
    Gam = block - A
    lhs = A_inv - block_inv
    rhs = A_inv @ Gam @ block_inv
    res = float(np.abs(lhs - rhs).max())
    scale = max(np.abs(A_inv).max(), np.abs(block_inv).max())

    inside = np.zeros(n, dtype=bool)
    inside[sl] = True
    cross = float(np.abs(block_inv[np.ix_(inside, ~inside)]).max(initial=0.0))

    const = 0.0
    if (~inside).any():
        m_sites = [s for s in (c, c + 1, d - 1, d) if c <= s <= d]
        n_sites = [s for s in (c - 1, c, c + 1, d - 1, d, d + 1) if a <= s <= b]
        GB = block_inv[sl, sl]
        for k in range(c, d + 1):
            supB = max(abs(GB[k - c, m - c]) for m in m_sites)
            for l in np.flatnonzero(~inside) + a:
                supA = max(abs(A_inv[s - a, l - a]) for s in n_sites)
                denom = supB * supA
                if denom > 0:
                    const = max(const, abs(A_inv[k - a, l - a]) / denom)
    return RestrictionReport(res, res / scale, cross, const)


@dataclass(frozen=True)
class SolutionBoundReport:
    max_ratio: float
    worst_site: int | None
    window: tuple[int, int]
    eigen_residual: float


def solution_bound_check(big: FiniteCMV, z: complex, psi=None, window: tuple[int, int] | None = None,
                         beta: complex = 1.0, beta_tilde: complex = 1.0,
                         residual_tol: float = 1e-8) -> SolutionBoundReport:
    """Verify, for E psi = z psi and a < n < b,

        |psi(n)| <= 2 |G(z; n, a)| max(|psi(a-1)|, |psi(a)|) + 2 |G(z; n, b)| max(|psi(b)|, |psi(b+1)|)

    with G the Green's function of the window [a, b] (phases beta,
    beta_tilde).  If ``psi`` is None the eigenvector of ``big`` whose
    eigenvalue is closest to z is used.
    """
    from .spectral import cmv_eigenpairs

    if psi is None:
        w, V = cmv_eigenpairs(big)
        i = int(np.argmin(np.abs(w - z)))
        if abs(w[i] - z) > residual_tol:
            raise NotApplicable(f"no eigenvalue of the operator within {residual_tol} of z = {z}")
        psi = V[:, i]
    psi = np.asarray(psi, dtype=complex)
    if len(psi) != big.n:
        raise ContractViolation("psi length does not match the operator")
    pnorm = np.linalg.norm(psi)
    E = big.dense("E")
    resid = float(np.linalg.norm(E @ psi - z * psi) / pnorm) if pnorm > 0 else 0.0
    if resid > residual_tol:
        raise NotApplicable(f"(z, psi) is not an eigenpair: residual {resid:.3e}")
    a, b = window if window is not None else (big.a + 1, big.b - 1)
    if not (big.a < a < b < big.b):
        raise ContractViolation(f"window [{a}, {b}] needs one extra site on each side inside [{big.a}, {big.b}]")
    inner = assemble_finite_cmv(big.path.window(a, b), beta, beta_tilde)
    G = green_matrix(inner, z)
    off = big.a
    sa = max(abs(psi[a - 1 - off]), abs(psi[a - off]))
    sb = max(abs(psi[b - off]), abs(psi[b + 1 - off]))
    worst, where = 0.0, None
    for site in range(a + 1, b):
        i = site - a
        lhs = abs(psi[site - off])
        rhs = 2.0 * abs(G[i, 0]) * sa + 2.0 * abs(G[i, -1]) * sb
        ratio = 0.0 if lhs == 0 else (math.inf if rhs == 0 else lhs / rhs)
        if ratio > worst:
            worst, where = ratio, site
    return SolutionBoundReport(worst, where, (a, b), resid)


def centered_window(big: FiniteCMV, psi, halfwidth: int = 32) -> tuple[int, int]:
    """Window of the given half-width around the largest entry of psi,
    clipped to leave one site of ``big`` on each side."""
    c = big.a + int(np.abs(np.asarray(psi)).argmax())
    return max(big.a + 1, c - halfwidth), min(big.b - 1, c + halfwidth)


PHASE_GRID = 8


@dataclass(frozen=True)
class PhaseSweep:
    beta: complex
    beta_tilde: complex
    verdict: SuitabilityVerdict
    margins: np.ndarray  # (PHASE_GRID, PHASE_GRID), row = beta index


def best_phase_pair(path: VerblunskyPath, z: complex, params: SuitabilityParams,
                    grid: int = PHASE_GRID) -> PhaseSweep:
    """Classify [-N, N] for every (beta, beta_tilde) on a grid x grid lattice of
    unimodular phases and return the pair with the largest margin.  A heuristic:
    nothing guarantees the best pair on the lattice is the best overall."""
    phases = np.exp(2j * np.pi * np.arange(grid) / grid)
    margins = np.empty((grid, grid))
    best = None
    for i, b in enumerate(phases):
        for j, bt in enumerate(phases):
            v = suitability_classify(assemble_finite_cmv(path, b, bt), z, params)
            margins[i, j] = v.margin
            if best is None or v.margin > best[2].margin:
                best = (b, bt, v)
    return PhaseSweep(complex(best[0]), complex(best[1]), best[2], margins)
