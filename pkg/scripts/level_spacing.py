"""Unfolded level spacings of H near E = 0, against Poisson and the free chain."""
import numpy as np

from skewspec.schrodinger import PotentialSpec
from skewspec.spectral import free_spec, spacing_stats
from skewspec.torus import GOLDEN, SkewShiftMap, TorusPoint


def main(N=4096, seed=0):
    m = SkewShiftMap(2, GOLDEN)
    x = TorusPoint(np.random.default_rng(seed).random(2))
    for label, spec in (("g=1", PotentialSpec(1.0, m, x)), ("free", free_spec())):
        st = spacing_stats(spec, N, 0.0, 0.5, M=8 if label == "g=1" else 1, seed=seed)
        print(f"{label:5s} gaps {len(st.gaps):5d} mean {st.mean:.3f} var {st.variance:.3f} "
              f"KS Poisson {st.ks_poisson:.3f} KS clock {st.ks_clock:.3f}")


if __name__ == "__main__":
    main()
