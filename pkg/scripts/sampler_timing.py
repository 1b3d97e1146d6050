"""Per-sample wall time of the deflation and rejection samplers.

Used to place the size where method="auto" switches from one to the other.

    python3 scripts/sampler_timing.py --n 12 16 20 24 --trials 50
"""

import argparse
import time

from hypertree_lab.dpp import build_kernel, sample
from hypertree_lab.seeding import SeedScheme


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[12, 16, 20, 24])
    ap.add_argument("--trials", type=int, default=50)
    args = ap.parse_args()
    for n in args.n:
        K = build_kernel(n)
        out = []
        for method in ("deflate", "rejection"):
            sample(K, SeedScheme(0, 0), method=method)  # compile / warm up
            t0 = time.perf_counter()
            for i in range(args.trials):
                sample(K, SeedScheme(1, i), method=method)
            out.append(f"{method} {1e3 * (time.perf_counter() - t0) / args.trials:8.2f} ms")
        print(f"n={n:>3}  " + "   ".join(out))


if __name__ == "__main__":
    main()
