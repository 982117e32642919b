"""Monte Carlo experiments over base points of the torus: how often [-N, N]
fails to be suitable, resolvent-norm tails, and perturbation trials."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .cmv import assemble_finite_cmv, tridiagonal_A
from .errors import ContractViolation, NearSpectrumError
from .green import (
    SuitabilityParams,
    perturb_suitability_margin,
    resolvent_norm,
    suitability_classify,
)
from .parallel import pmap, substream, torus_samples
from .sampling import SamplingFunction, VerblunskyPath, verblunsky_path
from .schrodinger import PotentialSpec, schrodinger_operator
from .torus import GOLDEN, SkewShiftMap, TorusPoint

WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    samples: int = 400
    scales: tuple = (32, 64, 128)
    route: str = "cmv"  # "cmv" at spectral parameter z, "schrodinger" at energy E
    lam: float = 0.5
    g: float = 1.0
    omega: float = GOLDEN
    r: int = 2
    z: complex = -1.0
    E: float = 0.0
    gamma_exponent: float = 0.5  # gamma = N^{-c}
    gamma: float | None = None  # fixed gamma overrides the exponent
    tau: float = 0.5  # Gamma = N^tau
    Gamma: float | None = None
    p: int = 3
    beta: complex = 1.0
    beta_tilde: complex = 1.0
    phase_sweep: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise ContractViolation("need at least one sample")
        sc = tuple(int(n) for n in self.scales)
        if not sc or any(n < 1 for n in sc) or list(sc) != sorted(sc):
            raise ContractViolation("scales must be positive and sorted ascending")
        object.__setattr__(self, "scales", sc)
        if self.route not in ("cmv", "schrodinger"):
            raise ContractViolation(f"unknown route {self.route!r}")
        if not 0 <= self.lam < 1:
            raise ContractViolation("need 0 <= lambda < 1")

    def params(self, N: int) -> SuitabilityParams:
        gamma = self.gamma if self.gamma is not None else N ** (-self.gamma_exponent)
        Gamma = self.Gamma if self.Gamma is not None else N ** self.tau
        return SuitabilityParams(gamma, Gamma, self.p)

    @property
    def map(self) -> SkewShiftMap:
        return SkewShiftMap(self.r, self.omega)

    def to_record(self) -> dict:
        rec = asdict(self)
        for k in ("z", "beta", "beta_tilde"):
            c = complex(rec[k])
            rec[k] = [c.real, c.imag]
        rec["scales"] = list(self.scales)
        return rec


def build_operator(config: ExperimentConfig, x, a: int, b: int, phases=None):
    """The finite operator on [a, b] at base point x for the configured route."""
    if config.route == "cmv":
        path = verblunsky_path(SamplingFunction.canonical(config.lam), config.map, x, a, b)
        beta, beta_t = phases if phases is not None else (config.beta, config.beta_tilde)
        return assemble_finite_cmv(path, beta, beta_t)
    return schrodinger_operator(PotentialSpec(config.g, config.map, TorusPoint(x)), a, b)


def _spectral_point(config: ExperimentConfig):
    return config.z if config.route == "cmv" else config.E


def wilson_interval(k: int, n: int, zq: float = WILSON_Z) -> tuple[float, float]:
    p = k / n
    den = 1.0 + zq * zq / n
    center = (p + zq * zq / (2 * n)) / den
    half = zq * math.sqrt(p * (1 - p) / n + zq * zq / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class ScaleEstimate:
    N: int
    unsuitable: int
    samples: int
    p_hat: float
    ci_low: float
    ci_high: float
    norm_failures: int
    decay_failures: int


@dataclass(frozen=True)
class UnsuitableMeasureReport:
    config: ExperimentConfig
    scales: tuple
    monotone: bool
    verdicts: dict = field(default_factory=dict, compare=False, repr=False)

    def p_hat(self) -> list[float]:
        return [s.p_hat for s in self.scales]

    def to_record(self) -> dict:
        return {"config": self.config.to_record(), "monotone": self.monotone,
                "scales": [asdict(s) for s in self.scales]}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, indent=2)


def _phases_for(config: ExperimentConfig, N: int, i: int):
    if not config.phase_sweep:
        return None
    t = substream(config.seed, N, i, 1).random(2)
    return tuple(complex(np.cos(2 * np.pi * s), np.sin(2 * np.pi * s)) for s in t)


def measure_unsuitable(config: ExperimentConfig, threads: int | None = None) -> UnsuitableMeasureReport:
    """Fraction of sampled x for which [-N, N] is not suitable, per scale."""
    zpt = _spectral_point(config)
    out, verdicts = [], {}
    for N in config.scales:
        params = config.params(N)
        xs = torus_samples(config.seed, (N,), config.samples, config.r)

        def classify(i):
            op = build_operator(config, xs[i], -N, N, _phases_for(config, N, i))
            return suitability_classify(op, zpt, params)

        vs = pmap(classify, range(config.samples), threads)
        verdicts[N] = vs
        k = sum(not v.suitable for v in vs)
        lo, hi = wilson_interval(k, config.samples)
        out.append(ScaleEstimate(N, k, config.samples, k / config.samples, lo, hi,
                                 sum(not v.norm_ok for v in vs), sum(not v.decay_ok for v in vs)))
    ph = [s.p_hat for s in out]
    mono = all(b <= a for a, b in zip(ph, ph[1:]))
    return UnsuitableMeasureReport(config, tuple(out), mono, verdicts)


@dataclass(frozen=True)
class WegnerCurve:
    N: int
    B: tuple
    full: tuple  # P(||A^{-1}|| > B) on [-N, N]
    sub: tuple  # same over 16 random subwindows per sample, pooled
    slope: float
    fit_points: int


@dataclass(frozen=True)
class WegnerReport:
    config: ExperimentConfig
    curves: tuple

    def to_record(self) -> dict:
        return {"config": self.config.to_record(), "curves": [asdict(c) for c in self.curves]}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, indent=2)


SUBWINDOWS = 16


def fit_tail_slope(B, P, M: int, min_count: int = 5, max_prob: float = 0.5) -> tuple[float, int]:
    """Least-squares slope of log P against log B over the tail region
    (at least ``min_count`` exceedances and P <= max_prob)."""
    B = np.asarray(B, dtype=float)
    P = np.asarray(P, dtype=float)
    use = (P * M >= min_count) & (P <= max_prob)
    if use.sum() < 2:
        return math.nan, int(use.sum())
    slope = np.polyfit(np.log(B[use]), np.log(P[use]), 1)[0]
    return float(slope), int(use.sum())


def _norm_or_inf(op, z) -> float:
    try:
        return resolvent_norm(tridiagonal_A(op, z, certify=False))
    except NearSpectrumError:
        return math.inf


def wegner_tail_estimate(config: ExperimentConfig, B_grid, threads: int | None = None) -> WegnerReport:
    """Empirical P(||A(z)^{-1}|| > B) for [-N, N] and for random subwindows.

    Subwindows [k, l] have k < l: a single site with unimodular phases on
    both sides is a 1x1 unimodular matrix, exactly singular at some z.
    Exactly singular windows count as infinite norm.
    """
    B = np.asarray(B_grid, dtype=float)
    if B.ndim != 1 or len(B) < 1 or np.any(B <= 0) or np.any(np.diff(B) <= 0):
        raise ContractViolation("B grid must be positive and increasing")
    if config.route != "cmv":
        raise ContractViolation("resolvent tails are measured for the CMV route")
    f = SamplingFunction.canonical(config.lam)
    curves = []
    for N in config.scales:
        xs = torus_samples(config.seed, (N,), config.samples, config.r)

        def norms(i):
            path = verblunsky_path(f, config.map, xs[i], -N, N)
            full = _norm_or_inf(assemble_finite_cmv(path, config.beta, config.beta_tilde), config.z)
            rng = substream(config.seed, N, i, 2)
            subs = []
            for _ in range(SUBWINDOWS):
                k, l = np.sort(rng.choice(np.arange(-N, N + 1), size=2, replace=False))
                sub = assemble_finite_cmv(path.window(int(k), int(l)), config.beta, config.beta_tilde)
                subs.append(_norm_or_inf(sub, config.z))
            return full, subs

        res = pmap(norms, range(config.samples), threads)
        full = np.array([r[0] for r in res])
        subs = np.concatenate([r[1] for r in res])
        Pf = (full[None, :] > B[:, None]).mean(axis=1)
        Ps = (subs[None, :] > B[:, None]).mean(axis=1)
        slope, npts = fit_tail_slope(B, Pf, config.samples)
        curves.append(WegnerCurve(N, tuple(B.tolist()), tuple(Pf.tolist()), tuple(Ps.tolist()),
                                  slope, npts))
    return WegnerReport(config, tuple(curves))


@dataclass(frozen=True)
class PerturbationTrial:
    params: SuitabilityParams
    radius: float
    before_margin: float
    after_margin: float
    preserved: bool
    attempts: int


def _fitted_params(verdict_op, z, p: int, N: int) -> SuitabilityParams | None:
    """Parameters for which the given interval is suitable with room to spare:
    Gamma one unit above the measured need, gamma half the largest admissible value."""
    T = tridiagonal_A(verdict_op, z, certify=False)
    inv_norm = resolvent_norm(T)
    Gamma = math.log(inv_norm) + p * math.log(2.0) + 1.0
    G = T.inverse()
    sites = np.arange(-N, N + 1)
    dist = np.abs(sites[:, None] - sites[None, :])
    mask = dist >= N / 2.0
    with np.errstate(divide="ignore"):
        room = (-(p + 1) * math.log(2.0) - np.log(np.abs(G[mask]))) / dist[mask]
    gmax = float(room.min())
    if gmax <= 0:
        return None
    return SuitabilityParams(gmax / 2.0, max(Gamma, 0.0), p)


def perturbation_trial(config: ExperimentConfig, N: int, trial: int, max_attempts: int = 50) -> PerturbationTrial:
    """Draw x until [-N, N] is suitable for fitted parameters, perturb every
    alpha_n and z by at most e^{-(2 Gamma + gamma |b - a|)}, and reclassify at level p - 1."""
    f = SamplingFunction.canonical(config.lam)
    z = complex(config.z)
    for attempt in range(1, max_attempts + 1):
        rng = substream(config.seed, N, trial, attempt, 3)
        x = rng.random(config.r)
        path = verblunsky_path(f, config.map, x, -N, N)
        op = assemble_finite_cmv(path, config.beta, config.beta_tilde)
        params = _fitted_params(op, z, config.p, N)
        if params is None:
            continue
        before = suitability_classify(op, z, params)
        if not before.suitable:
            continue
        delta = perturb_suitability_margin(params, 2 * N)
        n = len(path)
        rad = delta * np.sqrt(rng.random(n))
        ang = 2 * np.pi * rng.random(n)
        alphas = path.alphas + rad * np.exp(1j * ang)
        dz = delta * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        op2 = assemble_finite_cmv(VerblunskyPath.from_alphas(-N, alphas), config.beta, config.beta_tilde)
        after = suitability_classify(op2, z + dz, params.lowered())
        return PerturbationTrial(params, delta, before.margin, after.margin, after.suitable, attempt)
    raise ContractViolation(f"no suitable interval found in {max_attempts} draws")


def with_samples(config: ExperimentConfig, M: int) -> ExperimentConfig:
    return replace(config, samples=M)
