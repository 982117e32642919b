"""Unsuitable fraction of [-N, N] at the default thresholds, plus the largest
admissible decay rate per sample, which shows how far the default gamma is
from attainable at these scales."""
import math

import numpy as np

from skewspec.cmv import tridiagonal_A
from skewspec.montecarlo import ExperimentConfig, build_operator, measure_unsuitable
from skewspec.parallel import torus_samples


def max_gamma(op, N, p):
    G = tridiagonal_A(op, -1.0, certify=False).inverse()
    sites = np.arange(-N, N + 1)
    dist = np.abs(sites[:, None] - sites[None, :])
    mask = dist >= N / 2
    return float(((-(p + 1) * math.log(2) - np.log(np.abs(G[mask]))) / dist[mask]).min())


def main(samples=400, seed=0):
    cfg = ExperimentConfig(seed=seed, samples=samples)
    rep = measure_unsuitable(cfg)
    for s in rep.scales:
        print(f"N={s.N:4d}  p_hat={s.p_hat:.3f} [{s.ci_low:.3f}, {s.ci_high:.3f}]  "
              f"norm fails {s.norm_failures}, decay fails {s.decay_failures}")
    for N in cfg.scales:
        xs = torus_samples(seed, (N,), 40, cfg.r)
        g = [max_gamma(build_operator(cfg, x, -N, N), N, cfg.p) for x in xs]
        print(f"N={N:4d}  largest admissible gamma: median {np.median(g):.4f}, "
              f"max {np.max(g):.4f}; default {cfg.params(N).gamma:.4f}")


if __name__ == "__main__":
    main()
