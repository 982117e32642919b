"""Integrated density of states at g = 1 and the Thouless integral against
the cocycle exponent at a few energies."""
import numpy as np

from skewspec.cocycle import CocycleSpec, lyapunov_estimate, thouless_L
from skewspec.schrodinger import PotentialSpec
from skewspec.spectral import ids_estimate
from skewspec.torus import GOLDEN, SkewShiftMap, TorusPoint


def main(g=1.0, N=2048, M=16, seed=0):
    m = SkewShiftMap(2, GOLDEN)
    ids = ids_estimate(PotentialSpec(g, m, TorusPoint([0.0, 0.0])), N, M, 1024, seed)
    print(f"k(0) = {ids.at(0.0):.5f}, k(0.01) - k(-0.01) = {ids.at(0.01) - ids.at(-0.01):.5f}")
    for E in (-2.0, -1.0, 0.0, 0.5, 1.5):
        coc = lyapunov_estimate(CocycleSpec("schrodinger", m, g=g, E=E), M, 50_000, seed).value
        print(f"E={E:5.2f}  Thouless {thouless_L(ids, E):.5f}  cocycle {coc:.5f}")


if __name__ == "__main__":
    main()
