"""Schrodinger exponent at E = 0 against g, next to 1/2 log(1 + g^2) and the
Szego value carried over by the coupling map g = lambda / rho."""
import math

import numpy as np

from skewspec.cocycle import CocycleSpec, lyapunov_estimate
from skewspec.torus import GOLDEN, SkewShiftMap


def main(N=100_000, M=32, seed=0):
    m = SkewShiftMap(2, GOLDEN)
    gs = np.array([0.125, 0.25, 0.5, 1.0, 2.0])
    vals = []
    print("g        L(0)       1/2 log(1+g^2)   -1/2 log(1-lam^2)")
    for g in gs:
        est = lyapunov_estimate(CocycleSpec("schrodinger", m, g=g, E=0.0), M, N, seed)
        lam2 = g * g / (1 + g * g)
        vals.append(est.value)
        print(f"{g:<8} {est.value:.6f}   {0.5 * math.log1p(g * g):.6f}         {-0.5 * math.log1p(-lam2):.6f}")
    small = gs <= 0.5
    print(f"fitted power at small g: {np.polyfit(np.log(gs[small]), np.log(np.array(vals)[small]), 1)[0]:.3f}")


if __name__ == "__main__":
    main()
