"""Growth of the witness ratio R_n for delta_1, dx and (1-x)^p dx on [0, 1]."""

import argparse
from sobmuck.measure import Measure, power
from sobmuck.sobolev import niff_witness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--nmax", type=int, default=1024)
    args = ap.parse_args()
    nu1 = Measure.atomic(0.0, 1.0, [(1.0, 1.0)])
    nu2 = Measure.lebesgue(0.0, 1.0)
    nu3 = Measure.weighted(0.0, 1.0, power(1.0, args.p))
    n, prev = 2, None
    print("n,R_n,ratio_to_previous")
    while n <= args.nmax:
        r = niff_witness(nu1, nu2, nu3, args.p, n)
        ratio = "" if prev is None else f"{r / prev:.6f}"
        print(f"{n},{r:.12g},{ratio}")
        prev, n = r, 2 * n


if __name__ == "__main__":
    main()
