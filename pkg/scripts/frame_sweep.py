"""Exhaustive frame sweep at four groups: every valid single-block system
with |I| <= 4 and orders <= 12 is built into a frame, checked, and read back.

This is too slow for the test run (195,352 systems, about 6 minutes); pytest covers
|I| = 4 with orders <= 5.

    python3 scripts/frame_sweep.py [--atoms 4] [--order 12]
"""

import argparse
import time

from cyclicgra.frame import build_frame, check_frame_conditions, indices_of_frame, valid_systems


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--atoms", type=int, default=4)
    ap.add_argument("--order", type=int, default=12)
    args = ap.parse_args()

    t = time.perf_counter()
    n = bad = 0
    for s in valid_systems(args.atoms, args.order):
        n += 1
        f = build_frame(s)
        rep = check_frame_conditions(f)
        back = indices_of_frame(f)
        if not rep.ok or dict(back.index) != dict(s.index):
            bad += 1
            print(f"FAIL order={dict(s.order)} index={dict(s.index)}")
        if n % 20000 == 0:
            print(f"... {n} systems, {time.perf_counter() - t:.0f}s")
    print(f"FRAME-SWEEP systems={n} failures={bad} wall={time.perf_counter() - t:.1f}s")
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
