"""Szego exponent at several points of the circle, compared with -1/2 log(1 - lambda^2)."""
import math
import sys

import numpy as np

from skewspec.cocycle import CocycleSpec, lyapunov_estimate
from skewspec.sampling import SamplingFunction
from skewspec.torus import GOLDEN, SkewShiftMap


def main(lam=0.5, N=100_000, M=32, seed=0):
    m = SkewShiftMap(2, GOLDEN)
    f = SamplingFunction.canonical(lam)
    target = -0.5 * math.log(1 - lam * lam)
    print(f"target {target:.6f}")
    for t in np.linspace(0, 1, 6, endpoint=False):
        est = lyapunov_estimate(CocycleSpec("szego", m, f=f, z=np.exp(2j * np.pi * t)), M, N, seed)
        print(f"z = e(2 pi i {t:.2f})  L = {est.value:.6f} +- {est.std_error:.1e}")


if __name__ == "__main__":
    main(*(float(a) if i == 0 else int(a) for i, a in enumerate(sys.argv[1:])))
