"""Decide every regression instance and print outcome, theorem and timing."""

import argparse
import time

from sobmuck.battery import battery
from sobmuck.decide import decide, replay


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=128)
    args = ap.parse_args()
    print(f"{'instance':28s} {'expected':10s} {'outcome':10s} {'theorem':14s} replay  secs")
    for inst in battery():
        t = time.perf_counter()
        v = decide(inst.mu0, inst.mu1, inst.p, N=args.grid)
        ok = replay(v, inst.mu0, inst.mu1, inst.p, N=args.grid)
        print(f"{inst.name:28s} {inst.expected:10s} {v.outcome:10s} {str(v.theorem):14s} {str(ok):7s} "
              f"{time.perf_counter() - t:.2f}")


if __name__ == "__main__":
    main()
