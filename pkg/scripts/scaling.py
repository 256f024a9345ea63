"""Wall-clock of the streaming pipeline against input size.

    python scripts/scaling.py --sizes 250000 500000 1000000 2000000
"""
import argparse
import time

import numpy as np

from sraster import BatchParams, Pipeline, PipelineConfig, StreamRecord


def synthetic(n, per_period, span, seed=0):
    rng = np.random.default_rng(seed)
    period = 0
    while n > 0:
        k = min(per_period, n)
        xy = rng.integers(0, span, (k, 2)) * 1e-3 + 5e-4 + rng.normal(0, 2e-4, (k, 2))
        for x, y in xy.tolist():
            yield StreamRecord((x, y), period)
        n -= k
        period += 1


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250_000, 500_000, 1_000_000, 2_000_000])
    ap.add_argument("--per-period", type=int, default=25_000)
    ap.add_argument("--span", type=int, default=100, help="tile patch side length")
    ap.add_argument("--alpha", type=int, default=1)
    ap.add_argument("--pi", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cfg = PipelineConfig(BatchParams(prec=3, tau=8, mu=2), window=3, num_alpha=args.alpha,
                         num_pi=args.pi, chunk_size=4096)
    base = None
    print("records      best_s   us/record  ratio_to_first")
    for n in args.sizes:
        best = float("inf")
        for _ in range(args.repeat):
            t = time.perf_counter()
            for _ in Pipeline(cfg).periods(synthetic(n, args.per_period, args.span)):
                pass
            best = min(best, time.perf_counter() - t)
        base = base or best / n
        print(f"{n:9d}  {best:8.2f}  {1e6 * best / n:9.2f}  {best / n / base:8.2f}")


if __name__ == "__main__":
    main()
