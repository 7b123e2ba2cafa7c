"""Block construction against direct integration over random scenarios.

    python scripts/oracle_sweep.py --count 50 --seed 1
"""

import argparse

import numpy as np

from spinpair.coupling import SpinPair
from spinpair.fields import random_tabulated
from spinpair.pipeline import oracle_check
from spinpair.scenario import Scenario, TimeGrid
from spinpair.su2 import HalfInt


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-twice-j", type=int, default=3, help="largest 2j for either spin")
    p.add_argument("--tol", type=float, default=1e-6)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for k in range(args.count):
        tj1, tj2 = rng.integers(1, args.max_twice_j + 1, size=2)
        t1 = rng.uniform(1, 10)
        pair = SpinPair(HalfInt(int(tj1)), HalfInt(int(tj2)), rng.uniform(-2, 2))
        s = Scenario(pair, random_tabulated(rng, 0.0, t1, points=201), TimeGrid(0.0, t1, 11))
        report = oracle_check(s, args.tol)
        worst = max(worst, report.max_deviation)
        print(f"{k:3d} ({pair.j1}, {pair.j2}) lambda={pair.lam:+.3f} t1={t1:5.2f}  {report.summary()}")
    print(f"worst deviation {worst:.3e}")


if __name__ == "__main__":
    main()
