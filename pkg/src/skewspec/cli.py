"""Command-line front end.

    skewspec <subcommand> [--config FILE] [options]

Option values are resolved as flags > config file (key=value lines) >
defaults.  Every run writes its data files plus a ``*.manifest.json``
into ``--outdir`` (default ``.``); ``--out FILE`` names the primary data
file instead and puts everything beside it.  Exit codes: 0 ok, 1 contract
violation or bad usage, 2 numerical failure, 3 failed verification.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cocycle import CocycleSpec, lyapunov_estimate
from .errors import ContractViolation, NumericalFailure
from .io import RunManifest, write_csv, write_json
from .montecarlo import ExperimentConfig, measure_unsuitable, wegner_tail_estimate
from .parallel import torus_samples
from .sampling import SamplingFunction
from .schrodinger import PotentialSpec
from .spectral import ids_estimate, spacing_stats, zero_in_spectrum_check
from .torus import GOLDEN, BallRegion, SkewShiftMap, TorusPoint, count_hits


class UsageError(Exception):
    pass


class Outputs:
    """Where a run writes: ``--out`` names the primary file, the rest go beside it."""

    def __init__(self, outdir=None, out=None):
        self.primary = Path(out) if out else None
        self.dir = self.primary.parent if self.primary else Path(outdir or ".")
        if out and outdir and Path(outdir) != self.dir:
            raise ContractViolation("--out and --outdir disagree")
        self.dir.mkdir(parents=True, exist_ok=True)

    def __truediv__(self, name: str) -> Path:
        return self.dir / name

    def main(self, name: str) -> Path:
        return self.primary or self.dir / name


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def omega_value(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    if str(text).strip().lower() == "golden":
        return GOLDEN
    return float(text)


def int_list(text) -> tuple:
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).split(",") if v.strip())


COMMON = [
    ("seed", int, 0, "random seed"),
    ("omega", omega_value, GOLDEN, "frequency; 'golden' for (sqrt 5 - 1)/2"),
    ("r", int, 2, "torus dimension"),
    ("threads", int, None, "worker threads (default: SKEWSPEC_THREADS or all cores)"),
]

# option name -> (type, default, help) per subcommand
OPTIONS = {
    "lyapunov": [
        ("kind", str, "szego", "szego or schrodinger"),
        ("lambda", float, 0.5, "canonical coupling lambda (szego)"),
        ("g", float, 1.0, "coupling g (schrodinger)"),
        ("z_angle", float, 0.0, "z = exp(2 pi i angle) (szego)"),
        ("E", float, 0.0, "energy (schrodinger)"),
        ("steps", int, 100_000, "cocycle steps N"),
        ("samples", int, 32, "base points M"),
        ("mode", str, "sampling", "sampling or orbit"),
    ],
    "ids": [
        ("g", float, 1.0, "coupling g"),
        ("N", int, 2048, "interval length"),
        ("samples", int, 16, "base points M"),
        ("grid", int, 512, "energy grid points"),
    ],
    "suitability": [
        ("route", str, "cmv", "cmv or schrodinger"),
        ("lambda", float, 0.5, "canonical coupling lambda"),
        ("g", float, 1.0, "Schrodinger coupling"),
        ("z_angle", float, 0.5, "z = exp(2 pi i angle); 0.5 gives z = -1"),
        ("E", float, 0.0, "energy (schrodinger route)"),
        ("scales", int_list, (32, 64, 128), "comma-separated N values"),
        ("samples", int, 400, "base points per scale"),
        ("gamma_exponent", float, 0.5, "gamma = N^-c"),
        ("tau", float, 0.5, "Gamma = N^tau"),
        ("p", int, 3, "dyadic safety exponent"),
        ("phase_sweep", int, 0, "1: random boundary phases per sample"),
        ("verdicts", int, 0, "1: also write per-sample verdicts CSV"),
    ],
    "wegner": [
        ("lambda", float, 0.5, "canonical coupling lambda"),
        ("z_angle", float, 0.5, "z = exp(2 pi i angle)"),
        ("scales", int_list, (64,), "comma-separated N values"),
        ("samples", int, 400, "base points per scale"),
        ("B_min", float, 10 ** -0.5, "smallest threshold"),
        ("B_max", float, 1e6, "largest threshold"),
        ("B_count", int, 27, "thresholds, log-spaced"),
    ],
    "return-times": [
        ("epsilon", float, 0.1, "sup-metric radius of the target ball"),
        ("L", int, 100_000, "horizon"),
        ("starts", int, 10, "random starting points"),
    ],
    "spacing": [
        ("g", float, 1.0, "coupling g"),
        ("N", int, 4096, "interval length"),
        ("center", float, 0.0, "window center"),
        ("halfwidth", float, 0.5, "window half-width"),
        ("samples", int, 1, "base points (1: a single seeded point)"),
    ],
    "zero-spectrum": [
        ("g", float, 1.0, "coupling g"),
        ("Ns", int_list, (256, 1024, 4096), "comma-separated increasing N values"),
    ],
    "verify": [
        ("suite", str, "fast", "fast or full"),
    ],
}


def build_parser() -> _Parser:
    parser = _Parser(prog="skewspec", description="Skew-shift CMV and Schrodinger experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value file")
        p.add_argument("--outdir", default=None, help="directory for outputs (default .)")
        p.add_argument("--out", default=None, help="path of the primary output file")
        for key, typ, _, help_ in COMMON + opts:
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None, help=help_)
    return parser


def read_config_file(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractViolation(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def resolve(command: str, ns: argparse.Namespace) -> dict:
    table = {k: (t, d) for k, t, d, _ in COMMON + OPTIONS[command]}
    cfg = {k: d for k, (_, d) in table.items()}
    if ns.config:
        for k, v in read_config_file(ns.config).items():
            if k not in table:
                raise ContractViolation(f"unknown config key {k!r} for {command}")
            try:
                cfg[k] = table[k][0](v)
            except ValueError as exc:
                raise ContractViolation(f"bad value for {k}: {v!r}") from exc
    for k in table:
        v = getattr(ns, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _map(cfg) -> SkewShiftMap:
    return SkewShiftMap(cfg["r"], cfg["omega"])


def _z(cfg) -> complex:
    ang = cfg["z_angle"]
    return complex(math.cos(2 * math.pi * ang), math.sin(2 * math.pi * ang))


def cmd_lyapunov(cfg, out: Outputs):
    m = _map(cfg)
    if cfg["kind"] == "szego":
        spec = CocycleSpec("szego", m, f=SamplingFunction.canonical(cfg["lambda"]), z=_z(cfg))
    else:
        spec = CocycleSpec("schrodinger", m, g=cfg["g"], E=cfg["E"])
    x0 = torus_samples(cfg["seed"], (0,), 1, m.r)[0]
    est = lyapunov_estimate(spec, cfg["samples"], cfg["steps"], cfg["seed"], mode=cfg["mode"],
                            x0=x0, threads=cfg["threads"])
    z = _z(cfg)
    path = write_csv(out.main("lyapunov.csv"),
                     ["kind", "lambda", "g", "omega", "r", "z_re", "z_im", "E", "N", "M",
                      "value", "std_error", "seed"],
                     [[cfg["kind"], cfg["lambda"], cfg["g"], cfg["omega"], cfg["r"], z.real, z.imag,
                       cfg["E"], est.steps, est.samples, est.value, est.std_error, cfg["seed"]]])
    return [path], f"lyapunov {cfg['kind']}: {est.value:.6f} +- {est.std_error:.1e}"


def cmd_ids(cfg, out: Outputs):
    spec = PotentialSpec(cfg["g"], _map(cfg), TorusPoint(np.zeros(cfg["r"])))
    table = ids_estimate(spec, cfg["N"], cfg["samples"], cfg["grid"], cfg["seed"], cfg["threads"])
    path = write_csv(out.main("ids.csv"), ["E", "k"], table.rows())
    return [path], f"ids: {len(table.energies)} grid points, k(0) = {table.at(0.0):.6f}"


def _experiment(cfg) -> ExperimentConfig:
    return ExperimentConfig(
        seed=cfg["seed"], samples=cfg["samples"], scales=cfg["scales"],
        route=cfg.get("route", "cmv"), lam=cfg["lambda"], g=cfg.get("g", 1.0),
        omega=cfg["omega"], r=cfg["r"], z=_z(cfg), E=cfg.get("E", 0.0),
        gamma_exponent=cfg.get("gamma_exponent", 0.5), tau=cfg.get("tau", 0.5), p=cfg.get("p", 3),
        phase_sweep=bool(cfg.get("phase_sweep", 0)),
    )


def cmd_suitability(cfg, out: Outputs):
    rep = measure_unsuitable(_experiment(cfg), cfg["threads"])
    paths = [write_json(out.main("suitability.json"), rep.to_record())]
    if cfg["verdicts"]:
        rows = []
        for N, vs in rep.verdicts.items():
            for i, v in enumerate(vs):
                rows.append([N, i, v.suitable, v.norm_ok, v.decay_ok, v.margin, v.inverse_norm])
        paths.append(write_csv(out / "verdicts.csv",
                               ["N", "sample", "suitable", "norm_ok", "decay_ok", "margin", "inverse_norm"],
                               rows))
    return paths, f"suitability: unsuitable fractions {rep.p_hat()}"


def cmd_wegner(cfg, out: Outputs):
    B = np.logspace(math.log10(cfg["B_min"]), math.log10(cfg["B_max"]), cfg["B_count"])
    rep = wegner_tail_estimate(_experiment(cfg), B, cfg["threads"])
    rows = [[c.N, b, pf, ps] for c in rep.curves for b, pf, ps in zip(c.B, c.full, c.sub)]
    paths = [write_csv(out.main("wegner.csv"), ["N", "B", "P_full", "P_sub"], rows),
             write_json(out / "wegner.json", rep.to_record())]
    return paths, "wegner: slopes " + ", ".join(f"N={c.N}: {c.slope:.3f}" for c in rep.curves)


def cmd_return_times(cfg, out: Outputs):
    m = _map(cfg)
    center = torus_samples(cfg["seed"], (8, 0), 1, m.r)[0]
    region = BallRegion(TorusPoint(center), cfg["epsilon"])
    xs = torus_samples(cfg["seed"], (8, 1), cfg["starts"], m.r)
    hits = count_hits(m, xs, region, cfg["L"])
    freq = hits / cfg["L"]
    rows = [[i, cfg["L"], int(h), fr, region.measure] for i, (h, fr) in enumerate(zip(hits, freq))]
    path = write_csv(out.main("return_times.csv"), ["start", "L", "hits", "frequency", "measure"], rows)
    return [path], f"return-times: max |freq - |B|| = {np.abs(freq - region.measure).max():.5f}"


def cmd_spacing(cfg, out: Outputs):
    m = _map(cfg)
    x = torus_samples(cfg["seed"], (9,), 1, m.r)[0]
    st = spacing_stats(PotentialSpec(cfg["g"], m, TorusPoint(x)), cfg["N"], cfg["center"],
                       cfg["halfwidth"], cfg["samples"], cfg["seed"])
    p1 = write_csv(out.main("spacing_cdf.csv"), ["s", "cdf", "poisson_cdf"],
                   [[s, c, 1 - math.exp(-s)] for s, c in zip(st.cdf_grid, st.cdf)])
    p2 = write_json(out / "spacing.json", {"mean": st.mean, "variance": st.variance, "count": len(st.gaps),
                                           "ks_poisson": st.ks_poisson, "ks_clock": st.ks_clock})
    return [p1, p2], f"spacing: mean {st.mean:.4f}, KS to Poisson {st.ks_poisson:.4f}"


def cmd_zero_spectrum(cfg, out: Outputs):
    m = _map(cfg)
    x = torus_samples(cfg["seed"], (9,), 1, m.r)[0]
    mins = zero_in_spectrum_check(PotentialSpec(cfg["g"], m, TorusPoint(x)), cfg["Ns"])
    path = write_csv(out.main("zero_spectrum.csv"), ["N", "min_abs_eig"], zip(cfg["Ns"], mins))
    return [path], "zero-spectrum: " + ", ".join(f"{v:.3e}" for v in mins)


def cmd_verify(cfg, out: Outputs):
    from .verification import fast_suite, full_suite

    if cfg["suite"] not in ("fast", "full"):
        raise ContractViolation("suite must be fast or full")
    results = fast_suite() if cfg["suite"] == "fast" else full_suite()
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    path = write_json(out.main(f"verify_{cfg['suite']}.json"),
                      [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results])
    return [path], f"verify {cfg['suite']}: {len(results) - failed}/{len(results)} passed", failed


COMMANDS = {
    "lyapunov": cmd_lyapunov,
    "ids": cmd_ids,
    "suitability": cmd_suitability,
    "wegner": cmd_wegner,
    "return-times": cmd_return_times,
    "spacing": cmd_spacing,
    "zero-spectrum": cmd_zero_spectrum,
    "verify": cmd_verify,
}


def run_command(argv) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve(ns.command, ns)
        out = Outputs(ns.outdir, ns.out)
        t0 = time.perf_counter()
        res = COMMANDS[ns.command](cfg, out)
        paths, summary = res[0], res[1]
        failed = res[2] if len(res) > 2 else 0
        manifest = RunManifest(ns.command, cfg, __version__, time.perf_counter() - t0,
                               [str(p) for p in paths])
        manifest.write(out.main(ns.command).with_suffix(".manifest.json")
                       if out.primary else out / f"{ns.command}.manifest.json")
        print(summary)
        return 3 if failed else 0
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 1
    except (NumericalFailure, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
