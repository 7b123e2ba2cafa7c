"""Monte Carlo triplet populations after a noisy sweep, next to the closed form.

    python scripts/noisy_lz_montecarlo.py --gamma 0.2 --theta 2 -n 10000
    python scripts/noisy_lz_montecarlo.py --grid          # the nine acceptance points
"""

import argparse
import itertools
import time

from spinpair.analytics import LZParams, noisy_lz_populations
from spinpair.noise import run_ensemble
from spinpair.scenario import FAST_NOISE_FACTOR, noisy_lz_scenario

NAMES = ("pop:stretched", "pop:psi_plus", "pop:flipped")


def run_point(gamma, theta, args):
    s = noisy_lz_scenario(gamma, theta, args.n, seed=args.seed, fast_factor=args.fast_factor,
                          workers=args.workers, axes=args.axes)
    start = time.perf_counter()
    res = run_ensemble(s)
    ref = noisy_lz_populations(LZParams(gamma, theta)).as_tuple()
    cells = []
    for name, want in zip(NAMES, ref):
        got, se = res.final(name)
        band = 3 * se + 0.05 * want
        cells.append(f"{got:.4f}+-{se:.4f} (closed {want:.4f}, {'ok' if abs(got - want) <= band else 'OUT'})")
    print(f"Gamma={gamma:<5g} theta={theta:<4g} Lambda={s.noise.inv_corr_time:6.2f} "
          f"[{time.perf_counter() - start:5.0f} s]  " + "  ".join(cells), flush=True)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--gamma", type=float, default=0.2)
    p.add_argument("--theta", type=float, default=2.0)
    p.add_argument("-n", type=int, default=2000, help="trajectories")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fast-factor", type=float, default=FAST_NOISE_FACTOR)
    p.add_argument("--axes", choices=("xy", "y"), default="y")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--grid", action="store_true", help="sweep Gamma in {0.1, 0.2, 0.5} x theta in {0.5, 2, 5}")
    args = p.parse_args()
    points = itertools.product((0.1, 0.2, 0.5), (0.5, 2.0, 5.0)) if args.grid else [(args.gamma, args.theta)]
    print("populations of |++>, |Psi+>, |--> (band: 3 standard errors + 5%)")
    for g, th in points:
        run_point(g, th, args)


if __name__ == "__main__":
    main()
