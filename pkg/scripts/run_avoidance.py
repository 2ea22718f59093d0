"""Play a batch of seeded avoidance games and print one row per run.

    python scripts/run_avoidance.py --runs 20 --bob chase --center "1/8;0,0"
"""
import argparse
import sys

from solgame.arith import frac
from solgame.runs import RunSpec, run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--primes", default="2,3")
    ap.add_argument("--map", default="3/2")
    ap.add_argument("--target", default="0")
    ap.add_argument("--beta", default="3/10")
    ap.add_argument("--depth", type=int, default=25)
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bob", default="random", choices=("random", "chase", "escape"))
    ap.add_argument("--center", default="0")
    a = ap.parse_args()
    primes = tuple(int(p) for p in a.primes.split(","))
    print("seed\toutcome\twindows\tJ\tblocks\tpassed\tmin_orbit_distance")
    failed = 0
    for s in range(a.seed, a.seed + a.runs):
        res = run(RunSpec(primes=primes, maps=(a.map,), targets=(a.target,), beta=a.beta,
                          depth=a.depth, seed=s, bob=a.bob, center=a.center))
        au = res.audit
        failed += not res.passed
        d = au.get("min_orbit_distance")
        dist = ">= 1" if d is None else f"{float(frac(d)):.3g}"
        print(f"{s}\t{au['outcome']}\t{au.get('windows')}\t{au.get('certified_j')}\t"
              f"{au.get('blocks')}\t{res.passed}\t{dist}")
    print(f"{a.runs - failed}/{a.runs} runs passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
