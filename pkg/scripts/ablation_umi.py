"""Feature ablation (LR -> MLR(3) -> MLR(8)) on simulated UMi data, over several seeds."""

import argparse

from mmwpl.datasets import SplitSpec
from mmwpl.simulator import generate_dataset, campaign_config
from mmwpl.transfer import run_ablation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--split", type=float, default=0.7)
    args = ap.parse_args()

    print(f"{'seed':>4}  {'rung':<8} {'k':>2} {'test RMSE':>10} {'test R2':>8} {'train R2':>8}")
    for seed in range(args.seeds):
        ds = generate_dataset(campaign_config("UMi", args.n, seed=seed))
        rep = run_ablation(ds, split=SplitSpec(args.split, seed))
        for name, rung in zip(("LR", "MLR(3)", "MLR(8)"), rep.rungs):
            print(f"{seed:>4}  {name:<8} {len(rung.features):>2} {rung.test.rmse:>10.3f} "
                  f"{rung.test.r_square:>8.3f} {rung.train.r_square:>8.3f}")
        top = rep.rungs[-1].fit
        if top.dropped_features:
            print(f"      dropped as degenerate: {', '.join(top.dropped_features)}")


if __name__ == "__main__":
    main()
