"""Table of ||M||_n (p = 2) and the largest zero modulus of q_n on the battery."""

import argparse
import csv
import sys

import numpy as np

from sobmuck.battery import battery
from sobmuck.sobolev import DegeneracyError, SobolevSpace, m_norm, sop_monic, zeros


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=25)
    args = ap.parse_args()
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["instance", "n", "mnorm", "max_zero"])
    for inst in battery():
        sp = SobolevSpace(inst.mu0, inst.mu1, args.nmax)
        for n in range(1, args.nmax + 1):
            try:
                z = float(np.abs(zeros(sop_monic(inst.mu0, inst.mu1, n, space=sp))).max())
                m = m_norm(inst.mu0, inst.mu1, 2.0, n, space=sp)
            except DegeneracyError:
                break
            out.writerow([inst.name, n, f"{m:.12g}", f"{z:.12g}"])


if __name__ == "__main__":
    main()
