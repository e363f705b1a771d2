"""From a simplex to its linear forms, and the identity linking the hypergraph and constellation sides.

Run: python3 demos/02_forms_and_bridges.py [--simplex "0,0;1,0;0,1"] [--n 101]
"""

import argparse

import numpy as np

from primesimplex.constellations import weighted_density, weighted_simplex_average
from primesimplex.gt_measure import Simplex, l_delta
from primesimplex.lfc import make_measure
from primesimplex.simplex_forms import build_forms, phi_is_bijective
from primesimplex.weight_system import WeightSystem, diagonal_average, hypergraph_average, total_mass


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--simplex", default="0,0;1,0;0,1")
    ap.add_argument("--n", type=int, default=101)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    delta = Simplex.parse(args.simplex)
    N = args.n
    fam = build_forms(delta, N)
    print(f"Simplex {delta} in Z^{delta.dim}, modulus N={N}\n")
    print("Forms L_e^k, one per face e = J minus {j} and coordinate k:")
    for j in range(delta.dim + 1):
        print(f"   j={j}: " + ",  ".join(str(fam.form(j, k)) for k in range(1, delta.dim + 1)))
    print(f"\n{len(fam.distinct_forms)} distinct forms; l(Delta) = {l_delta(delta)}")
    print("structural flags:", dict(fam.flags))
    print("Phi is a bijection of Z_N^{d+1}:", phi_is_bijective(delta, N))

    ws = WeightSystem(fam, make_measure(N, 2, (1,) * delta.dim))
    J = tuple(range(delta.dim + 1))
    print(f"\nTotal mass mu_J(V_J) = {total_mass(J, ws).value:.4f} (tends to 1 as N grows)")

    rng = np.random.default_rng(args.seed)
    A = rng.random((N,) * delta.dim) < 0.5
    hyper = hypergraph_average(A, ws).value
    const = weighted_simplex_average(A, delta, ws.measure).value
    print("\nFor a random set A, the hypergraph average and the weighted constellation average agree:")
    print(f"   E_x prod_e 1_E_e(x) mu_J(x)       = {hyper:.12f}")
    print(f"   E_(y,t) prod_i 1_A(y+t v_i) w(..) = {const:.12f}")
    dens = weighted_density(A, ws.measure).value
    print("\nRestricted to the diagonal sum x_i = 0 the copies collapse to points:")
    print(f"   E_y 1_A(y) w(y) = {dens:.12f}")
    for jp in J:
        print(f"   diagonal average with e' = J minus {{{jp}}}: {diagonal_average(A, ws, jp).value:.12f}")


if __name__ == "__main__":
    main()
