"""Tail of ||A(-1)^{-1}|| over random x at lambda = 0.5."""
import numpy as np

from skewspec.montecarlo import ExperimentConfig, wegner_tail_estimate


def main(samples=400, seed=0):
    B = np.logspace(-0.5, 6, 27)
    rep = wegner_tail_estimate(ExperimentConfig(seed=seed, samples=samples, scales=(32, 64)), B)
    for c in rep.curves:
        print(f"N={c.N}: fitted slope {c.slope:.3f} over {c.fit_points} points")
        for b, pf, ps in zip(c.B, c.full, c.sub):
            print(f"  B={b:10.3g}  P_full={pf:.4f}  P_sub={ps:.4f}")


if __name__ == "__main__":
    main()
