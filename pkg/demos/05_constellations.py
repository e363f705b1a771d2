"""Counting prime constellations, the scale N^{d+1}/(log N)^l, and unwrapping copies mod N.

Run: python3 demos/05_constellations.py
"""

import argparse

import numpy as np

from primesimplex.constellations import PatternSet, count_affine_copies, scaling_experiment, unwrap_exhaustive
from primesimplex.gt_measure import Simplex


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=10**5)
    args = ap.parse_args()

    A = np.array([n in (2, 3, 5, 7) for n in range(1, 11)])
    rep = count_affine_copies(PatternSet.parse("0;1"), A, 10)
    print(f"1. Pairs (x, t) with x, x+t both prime and at most 10: {rep.total_pairs}")

    print("\n2. Prime pairs x, x+t against N^2/(log N)^2; the ratio settles in a narrow band.")
    ns = [n for n in (10**3, 10**4, 10**5) if n <= args.max_n]
    tab = scaling_experiment(Simplex.parse("0;1"), ns)
    for r in tab.reports:
        print(f"   N={r.n_cap:>6}: count {r.total_pairs:>10}, ratio {r.ratio:.4f}")
    print(f"   max/min ratio: {tab.band():.3f}")

    print("\n3. Prime corners (x, y), (x+t, y), (x, y+t) against N^3/(log N)^4:")
    tab = scaling_experiment(Simplex.parse("0,0;1,0;0,1"), [200, 500, 1000])
    for r in tab.reports:
        print(f"   N={r.n_cap:>5}: count {r.total_pairs:>9}, ratio {r.ratio:.4f}")

    print("\n4. A copy that fits in a small box mod N is a genuine copy in Z with t or t-N:")
    for text in ("0;1", "0,0;1,0;0,1", "0;2"):
        st = unwrap_exhaustive(Simplex.parse(text), 100, 10, 20)
        print(f"   {text:>12}: {st.wrapped} copies in [10,20] mod 100, {st.failures} fail to unwrap")
    print("   {0, 2} fails because t = 50 collapses it mod 100; the other two never fail here.")


if __name__ == "__main__":
    main()
