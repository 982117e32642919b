"""Self-checks: quick exact invariants (``fast``) and the twelve acceptance
criteria (``full``).  Each check returns a CheckResult; the CLI ``verify``
command and the acceptance tests both run these."""
from __future__ import annotations

import itertools
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cmv import (
    assemble_finite_cmv,
    product_form_A,
    reduction_phases,
    schrodinger_reduction,
    tridiagonal_A,
    unitarity_defect,
)
from .cocycle import CocycleSpec, cocycle_step, lyapunov_estimate, thouless_L
from .green import centered_window, restriction_identity_check, solution_bound_check
from .montecarlo import ExperimentConfig, measure_unsuitable, perturbation_trial, wegner_tail_estimate
from .parallel import substream
from .sampling import (
    SamplingFunction,
    VerblunskyPath,
    decaying_test_function,
    dyadic_grid,
    sqrt_taylor,
    sqrt_taylor_bound,
    verblunsky_path,
)
from .schrodinger import PotentialSpec, free_operator, schrodinger_operator
from .spectral import (
    cmv_eigenpairs,
    cmv_eigenvalues,
    eigs_symmetric_tridiag,
    IDSTable,
    ids_estimate,
    spacing_from_spectra,
    sturm_count,
    zero_in_spectrum_check,
)
from .torus import GOLDEN, BallRegion, SkewShiftMap, TorusPoint, count_hits, inverse_step

SEED = 20240601


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _golden2() -> SkewShiftMap:
    return SkewShiftMap(2, GOLDEN)


# ---------------------------------------------------------------- acceptance


def c01_cmv_lyapunov_constancy() -> CheckResult:
    target = -0.5 * math.log(1 - 0.25)
    f = SamplingFunction.canonical(0.5)
    ests, times = [], []
    for ang in (0.0, 0.3, 0.41):
        t0 = time.perf_counter()
        spec = CocycleSpec("szego", _golden2(), f=f, z=np.exp(2j * np.pi * ang))
        ests.append(lyapunov_estimate(spec, M=32, N=100_000, seed=SEED, threads=1))
        times.append(time.perf_counter() - t0)
    rel = [abs(e.value - target) / target for e in ests]
    pair = all(abs(a.value - b.value) <= 3 * math.hypot(a.std_error, b.std_error)
               for a, b in itertools.combinations(ests, 2))
    ok = max(rel) < 0.02 and max(times) < 10.0 and pair
    vals = ", ".join(f"{e.value:.6f}" for e in ests)
    return CheckResult("1 CMV Lyapunov constancy", ok,
                       f"estimates [{vals}] vs {target:.6f}, max rel err {max(rel):.2e}, "
                       f"max time {max(times):.2f}s, pairwise within 3 se: {pair}")


def schrodinger_zero_energy_estimates(gs, N: int = 100_000, M: int = 32) -> dict:
    out = {}
    for g in gs:
        spec = CocycleSpec("schrodinger", _golden2(), g=g, E=0.0)
        out[g] = lyapunov_estimate(spec, M=M, N=N, seed=SEED).value
    return out


def c02_schrodinger_zero_energy() -> CheckResult:
    est = schrodinger_zero_energy_estimates((1.0, 0.5, 0.1, 0.2, 0.4))
    t1, t05 = 0.5 * math.log(2.0), 0.5 * math.log(1.25)
    r1 = abs(est[1.0] - t1) / t1
    r05 = abs(est[0.5] - t05) / t05
    small = np.array([0.1, 0.2, 0.4])
    power = float(np.polyfit(np.log(small), np.log([est[g] for g in small]), 1)[0])
    ok = r1 < 0.02 and r05 < 0.03 and abs(power - 2.0) <= 0.2
    return CheckResult("2 Schrodinger exponent at E=0", ok,
                       f"L(g=1)={est[1.0]:.6f} vs {t1:.6f} (rel {r1:.3f}), "
                       f"L(g=0.5)={est[0.5]:.6f} vs {t05:.6f} (rel {r05:.3f}), small-g power {power:.3f}")


def c03_structural_exactness() -> CheckResult:
    f = SamplingFunction.canonical(0.5)
    m = _golden2()
    worst_A = worst_U = worst_R = 0.0
    for t in range(100):
        rng = substream(SEED, 3, t)
        x = rng.random(2)
        z = np.exp(2j * np.pi * rng.random())
        a, b = -32, 31
        ext = verblunsky_path(f, m, x, a - 1, b)
        op = assemble_finite_cmv(ext.window(a, b), *np.exp(2j * np.pi * rng.random(2)))
        worst_A = max(worst_A, tridiagonal_A(op, z).certified_error)
        worst_U = max(worst_U, unitarity_defect(op))
        red_op = assemble_finite_cmv(ext.window(a, b), *reduction_phases(ext.alphas[0], ext.alphas[-1]))
        H, g = schrodinger_reduction(red_op)
        direct = schrodinger_operator(PotentialSpec(g, m, TorusPoint(inverse_step(m, x))), a, b)
        worst_R = max(worst_R, float(np.abs(H.diagonal - direct.diagonal).max()))
    ok = worst_A < 1e-13 and worst_U < 1e-12 and worst_R < 1e-12
    return CheckResult("3 structural exactness", ok,
                       f"closed form vs product {worst_A:.1e}, unitarity {worst_U:.1e}, "
                       f"reduction vs direct {worst_R:.1e}")


def c04_restriction_identity() -> CheckResult:
    f = SamplingFunction.canonical(0.5)
    m = _golden2()
    worst, cross = 0.0, 0.0
    for t in range(50):
        rng = substream(SEED, 4, t)
        path = verblunsky_path(f, m, rng.random(2), -32, 31)
        c = int(rng.integers(-32, 31 - 15 + 1))
        opA = assemble_finite_cmv(path)
        opB = assemble_finite_cmv(path.window(c, c + 15), *np.exp(2j * np.pi * rng.random(2)))
        rep = restriction_identity_check(opA, opB, np.exp(2j * np.pi * rng.random()))
        worst = max(worst, rep.relative_residual)
        cross = max(cross, rep.cross_block_max)
    ok = worst < 1e-9 and cross == 0.0
    return CheckResult("4 resolvent restriction identity", ok,
                       f"max relative residual {worst:.1e}, max cross-block entry {cross}")


def c05_perturbation_trials() -> CheckResult:
    cfg = ExperimentConfig(seed=SEED)
    trials = [perturbation_trial(cfg, 128, t) for t in range(100)]
    kept = sum(tr.preserved for tr in trials)
    return CheckResult("5 perturbation preserves suitability", kept == 100,
                       f"{kept}/100 preserved at level p-1, min margin after "
                       f"{min(tr.after_margin for tr in trials):.3f}")


def c06_solution_bound() -> CheckResult:
    f = SamplingFunction.canonical(0.5)
    x = substream(SEED, 6).random(2)
    big = assemble_finite_cmv(verblunsky_path(f, _golden2(), x, 0, 255))
    w, V = cmv_eigenpairs(big)
    worst = 0.0
    for i in np.linspace(0, 255, 20).round().astype(int):
        rep = solution_bound_check(big, w[i], psi=V[:, i], window=centered_window(big, V[:, i]))
        worst = max(worst, rep.max_ratio)
    return CheckResult("6 solution bound", worst <= 1 + 1e-6, f"max ratio {worst:.6f} over 20 eigenpairs")


def c07_approximation_bounds() -> CheckResult:
    rng = substream(SEED, 7)
    viol = 0
    for _ in range(1000):
        x = rng.uniform(-0.9, 0.9)
        N = int(rng.integers(1, 60))
        r = max(abs(x), 1e-300)
        err = abs(sqrt_taylor(x, N) - math.sqrt(1 - x))
        if err > sqrt_taylor_bound(r, N) + 4 * np.finfo(float).eps:
            viol += 1
    q = 0.5
    slope = trig_truncation_slope(q)
    rate = math.log(q)
    rel = abs(slope - rate) / abs(rate)
    ok = viol == 0 and rel <= 0.2
    return CheckResult("7 approximation bounds", ok,
                       f"{viol} sqrt-tail violations in 1000, truncation log-slope {slope:.4f} "
                       f"vs decay rate {rate:.4f} (rel {rel:.3f})")


def trig_truncation_slope(q: float = 0.5, Ds=range(2, 13)) -> float:
    """Fitted slope of log(sup-grid truncation error) against D for the two-mode function."""
    f = decaying_test_function(q, 0.1, [(0, 1), (1, 1)], degree=60)
    fhat = f.fourier(2)
    pts = dyadic_grid(2, 128)
    vals = f(pts)
    Ds = np.array(list(Ds))
    errs = np.array([np.abs(fhat.truncate(int(D))(pts) - vals).max() for D in Ds])
    return float(np.polyfit(Ds, np.log(errs), 1)[0])


def return_time_errors(L: int, starts: int = 10) -> np.ndarray:
    m = _golden2()
    region = BallRegion(TorusPoint(substream(SEED, 8, 0).random(2)), 0.1)
    xs = np.stack([substream(SEED, 8, 1, i).random(2) for i in range(starts)])
    return np.abs(count_hits(m, xs, region, L) / L - region.measure)


def c08_return_times() -> CheckResult:
    e5 = return_time_errors(100_000)
    e4 = return_time_errors(10_000)
    ok = e5.max() < 0.008 and np.median(e4) > np.median(e5)
    return CheckResult("8 return times", ok,
                       f"max |freq-0.04| at L=1e5 {e5.max():.5f}, median err 1e4 {np.median(e4):.5f} "
                       f"> 1e5 {np.median(e5):.5f}")


def c09_zero_in_spectrum() -> CheckResult:
    spec = PotentialSpec(1.0, _golden2(), TorusPoint(substream(SEED, 9).random(2)))
    mins = zero_in_spectrum_check(spec, [256, 1024, 4096])
    ok = bool(np.all(np.diff(mins) <= 0) and mins[-1] < 0.05)
    return CheckResult("9 zero in spectrum", ok, "min|eig| " + ", ".join(f"{v:.3e}" for v in mins))


def c10_thouless() -> CheckResult:
    m = _golden2()
    ids = ids_estimate(PotentialSpec(1.0, m, TorusPoint([0.0, 0.0])), 2048, 16, 512, seed=SEED)
    L_ids = thouless_L(ids, 0.0)
    L_coc = lyapunov_estimate(CocycleSpec("schrodinger", m, g=1.0, E=0.0), 32, 100_000, seed=SEED).value
    d = abs(L_ids - L_coc)
    return CheckResult("10 Thouless consistency", d < 0.02,
                       f"cocycle {L_coc:.5f}, IDS integral {L_ids:.5f}, difference {d:.5f}")


WEGNER_B = np.logspace(-0.5, 6, 27)


def c11_measure_decay() -> CheckResult:
    rep = measure_unsuitable(ExperimentConfig(seed=SEED, samples=400, scales=(32, 64, 128)))
    ph = rep.p_hat()
    weg = wegner_tail_estimate(ExperimentConfig(seed=SEED, samples=400, scales=(64,)), WEGNER_B)
    slope = weg.curves[0].slope
    ok = rep.monotone and ph[-1] <= 0.05 and -1.5 <= slope <= -0.7
    return CheckResult("11 measure-decay experiments", ok,
                       f"unsuitable fractions {ph} (nonincreasing {rep.monotone}, <=0.05 at 128: "
                       f"{ph[-1] <= 0.05}), Wegner slope {slope:.3f}")


def determinism_runs() -> list[list[str]]:
    """CLI invocations of the stochastic acceptance runs (outputs go to --out)."""
    s = str(SEED)
    return [
        ["lyapunov", "--kind", "szego", "--lambda", "0.5", "--z-angle", "0.3",
         "--steps", "100000", "--samples", "32", "--seed", s],
        ["lyapunov", "--kind", "schrodinger", "--g", "1", "--E", "0",
         "--steps", "100000", "--samples", "32", "--seed", s],
        ["ids", "--g", "1", "--N", "2048", "--samples", "16", "--grid", "512", "--seed", s],
        ["suitability", "--lambda", "0.5", "--scales", "32,64,128", "--samples", "400", "--seed", s],
        ["wegner", "--lambda", "0.5", "--scales", "64", "--samples", "400", "--seed", s],
        ["return-times", "--epsilon", "0.1", "--L", "100000", "--starts", "10", "--seed", s],
        ["spacing", "--g", "1", "--N", "4096", "--samples", "4", "--seed", s],
    ]


def c12_determinism() -> CheckResult:
    from .cli import run_command

    bad = []
    with tempfile.TemporaryDirectory() as tmp:
        for k, argv in enumerate(determinism_runs()):
            blobs = []
            for rep in range(2):
                out = Path(tmp) / f"run{k}_{rep}"
                code = run_command(argv + ["--outdir", str(out), "--threads", str(1 + rep)])
                if code != 0:
                    bad.append(f"{argv[0]} exit {code}")
                    break
                blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())
                              if not p.name.endswith(".manifest.json")})
            if len(blobs) == 2 and blobs[0] != blobs[1]:
                bad.append(argv[0])
    return CheckResult("12 determinism", not bad,
                       "byte-identical outputs for all runs" if not bad else f"differences: {bad}")


ACCEPTANCE = [
    c01_cmv_lyapunov_constancy,
    c02_schrodinger_zero_energy,
    c03_structural_exactness,
    c04_restriction_identity,
    c05_perturbation_trials,
    c06_solution_bound,
    c07_approximation_bounds,
    c08_return_times,
    c09_zero_in_spectrum,
    c10_thouless,
    c11_measure_decay,
    c12_determinism,
]


# ---------------------------------------------------------------- fast


def _fast_checks():
    yield "free Schrodinger step", np.array_equal(
        cocycle_step("schrodinger", E=0.0, V=0.0).matrix, np.array([[0, -1], [1, 0]], dtype=complex))
    yield "free Szego step", np.array_equal(cocycle_step("szego", z=1.0, alpha=0.0).matrix, np.eye(2))
    ev = eigs_symmetric_tridiag(free_operator(1, 5))
    yield "free chain eigenvalues", np.allclose(ev, np.sort(2 * np.cos(np.arange(1, 6) * np.pi / 6)),
                                                atol=1e-13)
    rng = substream(SEED, 100)
    op = schrodinger_operator(PotentialSpec(1.0, _golden2(), TorusPoint(rng.random(2))), 1, 200)
    ev = eigs_symmetric_tridiag(op)
    E = rng.uniform(ev[0] - 1, ev[-1] + 1, 1000)
    yield "Sturm count", np.array_equal(sturm_count(op.diagonal, np.ones(199), E),
                                        np.searchsorted(ev, E, side="left"))
    path = verblunsky_path(SamplingFunction.canonical(0.5), _golden2(), rng.random(2), -8, 8)
    cm = assemble_finite_cmv(path, np.exp(0.3j), np.exp(1.1j))
    yield "CMV unitarity", unitarity_defect(cm) < 1e-12
    yield "closed-form A(z)", np.abs(tridiagonal_A(cm, np.exp(0.7j), certify=False).dense()
                                     - product_form_A(cm, np.exp(0.7j))).max() < 1e-13
    one = assemble_finite_cmv(VerblunskyPath.from_alphas(0, [0.3]), np.exp(0.2j), np.exp(0.9j))
    yield "1x1 CMV unimodular", abs(abs(cmv_eigenvalues(one)[0]) - 1) < 1e-12
    yield "canonical |alpha| = |lambda|", np.allclose(np.abs(path.alphas), 0.5, rtol=0, atol=1e-15)
    yield "sqrt Taylor at 0", sqrt_taylor(0.0, 7) == 1.0
    ap = np.arange(200.0)
    st = spacing_from_spectra([ap], 1, 100.0, 40.0)
    yield "rigid spectrum spacing", st.ks_clock == 0.0
    grid = np.linspace(-3.0, 3.0, 6001)
    table = IDSTable(grid, (grid >= 0.4).astype(float), 1, 1)
    yield "Thouless point mass", abs(thouless_L(table, -1.0) - math.log(1.4)) < 1e-3


def fast_suite() -> list[CheckResult]:
    out = []
    for name, ok in _fast_checks():
        out.append(CheckResult(name, bool(ok), "ok" if ok else "mismatch"))
    return out


def full_suite() -> list[CheckResult]:
    return [fn() for fn in ACCEPTANCE]
