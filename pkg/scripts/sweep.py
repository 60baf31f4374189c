"""Run the desk-scale sweep and print per-stage timings and failures.

    python3 scripts/sweep.py [--atoms 3] [--order 12] [--limit N]
"""

import argparse
import itertools
import time
from collections import Counter

from cyclicgra.sweep import STAGES, check_system, desk_systems


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--atoms", type=int, default=3)
    ap.add_argument("--order", type=int, default=12)
    ap.add_argument("--limit", type=int, default=None, help="stop after this many systems")
    args = ap.parse_args()

    systems = itertools.islice(desk_systems(args.atoms, args.order), args.limit)
    t = time.perf_counter()
    seconds, failed, n = Counter(), Counter(), 0
    for s in systems:
        r = check_system(s)
        n += 1
        seconds.update(r.seconds)
        for stage, msgs in r.failures.items():
            if msgs:
                failed[stage] += 1
                print(f"FAIL {stage} order={dict(s.order)} index={dict(s.index)} : {msgs[0]}")
    for stage in STAGES:
        print(f"STAGE {stage:16s} failures={failed[stage]:5d} seconds={seconds[stage]:8.1f}")
    print(f"SWEEP systems={n} failures={sum(failed.values())} wall={time.perf_counter() - t:.1f}s")


if __name__ == "__main__":
    main()
