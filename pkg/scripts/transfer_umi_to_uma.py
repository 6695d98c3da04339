"""Fit on simulated UMi data and score the frozen model on UMi (held out) and UMa."""

import argparse

from mmwpl.datasets import SplitSpec
from mmwpl.simulator import generate_dataset, campaign_config
from mmwpl.transfer import LR_FEATURES, MLR3_FEATURES, MLR8_FEATURES, run_transfer

LADDER = {"LR": LR_FEATURES, "MLR(3)": MLR3_FEATURES, "MLR(8)": MLR8_FEATURES}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    umi = generate_dataset(campaign_config("UMi", args.n, seed=args.seed))
    uma = generate_dataset(campaign_config("UMa", args.n, seed=args.seed + 1))
    split = SplitSpec(0.7, args.seed)
    print(f"{'model':<8} {'metric':<9} {'UMi test':>10} {'UMa':>10}")
    for name, feats in LADDER.items():
        rep = run_transfer(umi, uma, feats, split)
        for metric in ("mae", "rmse", "r_square"):
            a, b = getattr(rep.in_domain, metric), getattr(rep.cross_domain, metric)
            print(f"{name:<8} {metric:<9} {a:>10.3f} {b:>10.3f}")


if __name__ == "__main__":
    main()
