"""The pseudo-random measure nu_b: where it lives, how big it gets, and its mean.

Run: python3 demos/01_measure_profile.py [--omega 3]
"""

import argparse
import math

import numpy as np

from primesimplex.gt_measure import MeasureParams, desk_r, mangoldt_bar_table, tabulate_measure
from primesimplex.numtheory import build_sieve, build_wtrick


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--omega", type=int, default=2)
    ap.add_argument("--b", type=int, default=1)
    args = ap.parse_args()

    sieve = build_sieve(40 * 10**5)
    wt = build_wtrick(args.omega, sieve)
    print(f"W-trick with omega={args.omega}: W={wt.w}, phi(W)={wt.phi_w}, residue b={args.b}\n")

    print("1. The modified von Mangoldt function has mean close to 1 on the progression Wn+b.")
    for N in (10**3, 10**4, 10**5):
        if wt.w * N + args.b > sieve.limit:
            break
        lam = mangoldt_bar_table(N, wt, args.b, sieve)
        print(f"   N={N:>6}: (1/N) sum Lambda-bar_b(n) = {math.fsum(lam[1:]) / N:.4f}")

    print("\n2. nu_b is 1 off the window [eps1 N, eps2 N] and a squared divisor sum inside it.")
    N = 10**4
    params = MeasureParams(N, wt, (args.b,), desk_r(N))
    m = tabulate_measure(params, sieve)
    lo, hi = params.window()
    inside = m.values[0, lo : hi + 1]
    print(f"   N={N}, R={params.r_value:.0f}, window [{lo}, {hi}]")
    print(f"   inside the window: min {inside.min():.3f}, median {np.median(inside):.3f}, max {inside.max():.3f}")
    ref = wt.phi_w / wt.w * math.log(params.r_value)
    print(f"   at a prime Wn+b > R the value is (phi(W)/W) log R = {ref:.4f}")

    print("\n3. Its mean tends to 1 as N grows (the deviation has no explicit rate).")
    for N in (10**3, 10**4, 10**5):
        if wt.w * N + args.b > sieve.limit:
            break
        m = tabulate_measure(MeasureParams(N, wt, (args.b,), desk_r(N)), sieve)
        print(f"   N={N:>6}: E nu_b = {m.mean(0):.4f}   |E - 1| = {abs(m.mean(0) - 1):.4f}")


if __name__ == "__main__":
    main()
