#!/usr/bin/env python3
"""Print a table of family-wise critical values across the design grid.

Shows how the Monte-Carlo threshold sits between the single-scale quantile
and the asymptotic (many-scales) bound, growing with the number of scales
and shrinking as the Hurst parameter grows.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lrdshift import (
    ThresholdQuery,
    asymptotic_threshold,
    improved_threshold,
    single_scale_threshold,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--hursts", type=float, nargs="+", default=[0.6, 0.75, 0.9])
    parser.add_argument("--scales", type=int, nargs="+", default=[2, 5, 10, 15])
    parser.add_argument("--alphas", type=float, nargs="+", default=[0.01, 0.05])
    parser.add_argument("--mc-reps", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    for alpha in args.alphas:
        single = single_scale_threshold(alpha).value
        print(f"\nalpha = {alpha}   (single-scale critical value {single:.4f})")
        header = "m    asymptotic" + "".join(f"   H={h:<6}" for h in args.hursts)
        print(header)
        for i, m in enumerate(args.scales):
            row = [f"{m:<4} {asymptotic_threshold(alpha, m).value:>10.4f}"]
            for j, hurst in enumerate(args.hursts):
                result = improved_threshold(
                    ThresholdQuery(
                        alpha=alpha, num_scales=m, hurst=hurst,
                        mc_reps=args.mc_reps, seed=args.seed + 100 * i + j,
                    )
                )
                row.append(f"{result.value:>9.4f}")
            print("  ".join(row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
