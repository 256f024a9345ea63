"""Two hubs, one retired and one new, tracked through the sliding window.

    python scripts/evolving_hubs.py --window 3
"""
import argparse

from sraster import BatchParams, Metric, Pipeline, PipelineConfig
from sraster.grid import project
from sraster.ingest import GeneratorSpec, Hub, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--window", type=int, default=3)
    ap.add_argument("--tau", type=int, default=15)
    ap.add_argument("--periods", type=int, default=14)
    ap.add_argument("--alpha", type=int, default=2)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    old = Hub((18.06005, 59.33005), 0.00002, 60, (0, 5))
    new = Hub((18.08005, 59.31005), 0.00002, 60, (6, args.periods))
    spec = GeneratorSpec(seed=args.seed, hubs=(old, new), noise_per_period=200,
                         num_periods=args.periods, bbox=(18.0, 18.2, 59.25, 59.4))
    recs, _ = generate(spec)
    cfg = PipelineConfig(BatchParams(prec=4, tau=args.tau, metric=Metric(), mu=1),
                         window=args.window, num_alpha=args.alpha)
    hubs = {"old": project(old.center, 4), "new": project(new.center, 4)}

    print(f"{len(recs)} records, window={args.window}, tau={args.tau}")
    print("period  clusters  old  new")
    for period, rows in Pipeline(cfg).periods(recs):
        tiles = {r.tile for r in rows}
        seen = {
            name: any(max(abs(t[0] - c[0]), abs(t[1] - c[1])) <= 1 for t in tiles)
            for name, c in hubs.items()
        }
        n = len({r.cluster_id for r in rows})
        print(f"{period:6d}  {n:8d}  {'x' if seen['old'] else '.':>3}  {'x' if seen['new'] else '.':>3}")


if __name__ == "__main__":
    main()
