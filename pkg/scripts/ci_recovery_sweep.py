"""How fast do fitted CI and FI parameters settle as the sample count grows?"""

import argparse

import numpy as np

from mmwpl import pathloss as pl
from mmwpl.simulator import SimConfig, generate_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ple", type=float, default=2.0)
    ap.add_argument("--sigma", type=float, default=4.0)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    truth = pl.CiModel(args.ple, 28.0, args.sigma)
    print(f"{'N':>6} {'CI n mean':>10} {'CI n std':>9} {'sigma mean':>11} {'FI beta std':>12}")
    for n in (100, 300, 1000, 3000, 10000):
        ci, sig, fi = [], [], []
        for seed in range(args.repeats):
            ds = generate_dataset(SimConfig(n_samples=n, ground_truth=truth, seed=seed))
            fit = pl.fit_ci(ds)
            ci.append(fit.ple)
            sig.append(fit.shadow_sigma)
            fi.append(pl.fit_fi(ds).beta)
        print(f"{n:>6} {np.mean(ci):>10.4f} {np.std(ci):>9.4f} {np.mean(sig):>11.4f} {np.std(fi):>12.4f}")


if __name__ == "__main__":
    main()
