"""Command-line front end.

    spinpair simulate --scenario run.ini --out series.csv [--trajectories N] [--seed S]
    spinpair figure --figure fig4 --out fig4.csv
    spinpair oracle-check --scenario run.ini [--tol 1e-6]
    spinpair analytic noisy-lz --gamma 0.2 --theta 2 --initial ++

Exit codes: 0 ok, 2 usage or parse error, 3 integration failure, 4 ensemble failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import analytics
from .figures import FIGURES, figure
from .integrator import IntegrationError
from .noise import EnsembleError
from .pipeline import format_value, oracle_check, simulate
from .scenario import ScenarioError, load_scenario
from .su2 import SpinDomainError

EXIT_OK, EXIT_USAGE, EXIT_INTEGRATION, EXIT_ENSEMBLE = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build() -> argparse.ArgumentParser:
    p = _Parser(prog="spinpair", description="Two exchange-coupled spins in time-dependent fields.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a scenario and write a CSV series")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--trajectories", type=int, help="override the ensemble size")
    s.add_argument("--seed", type=int, help="override the ensemble master seed")

    f = sub.add_parser("figure", help="write the data behind one figure")
    f.add_argument("--figure", required=True)
    f.add_argument("--out", required=True)

    o = sub.add_parser("oracle-check", help="block construction versus direct integration")
    o.add_argument("--scenario", required=True)
    o.add_argument("--tol", type=float, default=1e-6)

    a = sub.add_parser("analytic", help="evaluate a closed form")
    asub = a.add_subparsers(dest="formula", required=True, parser_class=_Parser)
    n = asub.add_parser("noisy-lz", help="asymptotic triplet populations under fast noise")
    n.add_argument("--gamma", type=float, required=True)
    n.add_argument("--theta", type=float, default=0.0)
    n.add_argument("--initial", choices=[i.value for i in analytics.Initial], default="++")
    j = asub.add_parser("joint-lz", help="noiseless joint LZ probability")
    j.add_argument("--j1", required=True)
    j.add_argument("--j2", required=True)
    j.add_argument("--gamma", type=float, required=True)
    lz = asub.add_parser("lz", help="single spin-1/2 LZ probability")
    lz.add_argument("--gamma", type=float, required=True)
    r = asub.add_parser("gamma-regime", help="effect of noise on the joint transition")
    r.add_argument("--gamma", type=float, required=True)
    z = asub.add_parser("asymptotic-jz", help="final magnetization after the noisy sweep")
    z.add_argument("--gamma", type=float, required=True)
    z.add_argument("--theta", type=float, default=0.0)
    return p


def _analytic(args) -> None:
    if args.formula == "noisy-lz":
        pops = analytics.noisy_lz_populations(analytics.LZParams(args.gamma, args.theta), args.initial)
        for name, v in zip(("p_pp", "p_psi_plus", "p_mm"), pops.as_tuple()):
            print(f"{name} {format_value(v)}")
    elif args.formula == "joint-lz":
        print(format_value(float(analytics.joint_lz_probability(args.j1, args.j2, args.gamma))))
    elif args.formula == "lz":
        print(format_value(float(analytics.lz_probability(args.gamma))))
    elif args.formula == "gamma-regime":
        print(analytics.gamma_regime(args.gamma).value)
    else:
        print(format_value(analytics.asymptotic_jz(analytics.LZParams(args.gamma, args.theta))))


def _simulate(args) -> None:
    s = load_scenario(args.scenario)
    if args.trajectories is not None or args.seed is not None:
        if s.ensemble is None:
            raise SpinDomainError("--trajectories/--seed need a scenario with noise and an ensemble")
        e = s.ensemble
        e = dataclasses.replace(e, n_trajectories=args.trajectories or e.n_trajectories,
                                master_seed=e.master_seed if args.seed is None else args.seed)
        s = dataclasses.replace(s, ensemble=e)
    simulate(s).write(args.out)


def main(argv=None) -> int:
    try:
        args = _build().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "simulate":
            _simulate(args)
        elif args.command == "figure":
            if args.figure not in FIGURES:
                print(f"unknown figure {args.figure!r}; known: {', '.join(FIGURES)}", file=sys.stderr)
                return EXIT_USAGE
            figure(args.figure).write(args.out)
        elif args.command == "oracle-check":
            report = oracle_check(load_scenario(args.scenario), args.tol)
            print(report.summary())
            return EXIT_OK if report.passed else 1
        else:
            _analytic(args)
    except (ScenarioError, SpinDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except EnsembleError as exc:
        print(f"ensemble failed: {exc}", file=sys.stderr)
        return EXIT_ENSEMBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
