#!/usr/bin/env python3
"""Sweep the decode count threshold and print exact error rates as CSV.

Useful for picking a threshold for nonstandard rate/window settings;
columns: count_threshold, threshold_hz, p_minus_as_plus, p_plus_as_minus,
sum.
"""

import argparse
import math

from word2spike.spike_codec import poisson_cdf, poisson_pmf, poisson_sf_ge


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--window-ms", type=float, default=200.0)
    ap.add_argument("--rate-plus", type=float, default=100.0)
    ap.add_argument("--rate-minus", type=float, default=50.0)
    args = ap.parse_args()

    window_s = args.window_ms / 1000.0
    lam_minus = args.rate_minus * window_s
    lam_plus = args.rate_plus * window_s

    print("count_threshold,threshold_hz,p_minus_as_plus,p_plus_as_minus,sum")
    for k in range(math.floor(lam_minus) + 1, math.floor(lam_plus) + 1):
        p_mp = poisson_sf_ge(k, lam_minus)
        p_pm = poisson_cdf(k - 1, lam_plus) - poisson_pmf(0, lam_plus)
        print(f"{k},{k / window_s:.3f},{p_mp:.6g},{p_pm:.6g},{p_mp + p_pm:.6g}")


if __name__ == "__main__":
    main()
