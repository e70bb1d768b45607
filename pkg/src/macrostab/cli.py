"""Command-line front end.

Subcommands: classify, cluster, decohere, measure, ground,
symmetry-breaking, and run <scenario-file>.  Exit codes: 0 success,
2 validation error, 3 numerical error, 4 capability (size cap) error.
``MACROSTAB_THREADS`` overrides the trajectory worker count and
``MACROSTAB_NUMBA=0`` selects the pure-numpy kernels.
"""

import argparse
import json
import sys

from .errors import MacrostabError, ValidationError
from .runner import run_ground_report, run_scenario, write_report_files
from .scenario import (
    FORMATS,
    Scenario,
    ScenarioParams,
    StateSource,
    load_scenario,
)


def parse_sizes(text):
    """Parse 'a:b:step' (inclusive) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) == 2:
                parts.append("1")
            if len(parts) != 3:
                raise ValueError
            a, b, step = (int(v) for v in parts)
            if step < 1 or b < a:
                raise ValueError
            return list(range(a, b + 1, step))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"cannot parse sizes {text!r}; use a:b:step or a comma list")


def _add_common(p):
    p.add_argument("--sizes", required=True, help="size sweep, a:b:step or comma list")
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--out", default=None, help="output base path (writes <out>.json / CSVs)")
    p.add_argument("--format", choices=FORMATS, default="both")
    p.add_argument("--geometry", choices=("open-chain", "periodic-chain"), default="open-chain")


def _add_state(p):
    p.add_argument("--state", default="ghz", help="state family name, or 'catalog'")
    p.add_argument("--state-file", default=None, help="state file (overrides --state)")
    p.add_argument("--k", type=int, default=None, help="dicke excitation count")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--method", default=None, help="pure-phase construction method")


def _add_model(p):
    p.add_argument("--model", choices=("transverse-ising", "xxz"), default="transverse-ising")
    p.add_argument("--j", dest="J", type=float, default=1.0)
    p.add_argument("--h", dest="h", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--b-field", dest="B", type=float, default=0.0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="macrostab",
        description="Spin-chain fluctuation, cluster-property, decoherence and "
        "measurement-stability experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="AFS/NFS scaling of the maximal additive fluctuation")
    _add_common(p)
    _add_state(p)
    _add_model(p)

    p = sub.add_parser("cluster", help="normalized correlations and Omega(eps)")
    _add_common(p)
    _add_state(p)
    _add_model(p)
    p.add_argument("--epsilon", type=float, default=0.1)

    p = sub.add_parser("decohere", help="dephasing rates and their size scaling")
    _add_common(p)
    _add_state(p)
    _add_model(p)
    p.add_argument("--kappa", type=float, default=0.01)
    p.add_argument("--kernel", choices=("collective", "independent", "exponential"), default="collective")
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--xi", type=float, default=2.0)
    p.add_argument("--n-traj", type=int, default=200, help="0 runs analytic rates only")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--horizon", type=float, default=None)

    p = sub.add_parser("measure", help="stability against local measurements")
    _add_common(p)
    _add_state(p)
    _add_model(p)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--varepsilon", type=float, default=0.05)
    p.add_argument("--min-distance", type=int, default=None)

    p = sub.add_parser("ground", help="iterative ground states of a spin-chain model")
    _add_common(p)
    _add_model(p)
    p.add_argument("--export", default=None, help="base path for exported state files")

    p = sub.add_parser("symmetry-breaking", help="symmetric ground state versus pure-phase vacuum")
    _add_common(p)
    _add_model(p)
    p.add_argument("--kappa", type=float, default=0.01)
    p.add_argument("--nfs-factor", type=float, default=3.0)

    p = sub.add_parser("run", help="execute a scenario file")
    p.add_argument("scenario", help="path to a JSON scenario")

    return parser


def _state_source(args):
    if getattr(args, "state_file", None):
        return StateSource(file=args.state_file)
    params = {}
    if args.k is not None:
        params["k"] = args.k
    if args.theta is not None:
        params["theta"] = args.theta
    if args.phi is not None:
        params["phi"] = args.phi
    if args.method is not None:
        params["method"] = args.method
    if args.state in ("tfim-ground", "pure-phase"):
        params.setdefault("J", args.J)
        params.setdefault("h", args.h)
    if args.state == "tfim-ground" and args.B:
        params["B"] = args.B
    return StateSource(family=args.state, params=params)


def _params(args, **extra):
    fields = {"seed": args.seed, "geometry": args.geometry}
    for name in ("J", "h", "delta", "B", "model"):
        if hasattr(args, name):
            fields[name] = getattr(args, name)
    fields.update(extra)
    return ScenarioParams(**fields)


def _scenario_from_args(args):
    sizes = tuple(parse_sizes(args.sizes))
    command = args.command
    if command == "classify":
        return Scenario("classify", sizes, ("classify",), _state_source(args), _params(args), args.out, args.format)
    if command == "cluster":
        return Scenario("cluster", sizes, ("cluster",), _state_source(args),
                        _params(args, epsilon=args.epsilon), args.out, args.format)
    if command == "decohere":
        return Scenario("decohere", sizes, ("decohere",), _state_source(args),
                        _params(args, kappa=args.kappa, kernel=args.kernel, axis=args.axis,
                                xi=args.xi, n_traj=args.n_traj, dt=args.dt, horizon=args.horizon),
                        args.out, args.format)
    if command == "measure":
        return Scenario("measure", sizes, ("measure",), _state_source(args),
                        _params(args, epsilon=args.epsilon, varepsilon=args.varepsilon,
                                min_distance=args.min_distance),
                        args.out, args.format)
    if command == "ground":
        return Scenario("ground", sizes, (), None, _params(args), args.out, args.format)
    if command == "symmetry-breaking":
        return Scenario("symmetry-breaking", sizes, ("symmetry-breaking",), None,
                        _params(args, kappa=args.kappa, nfs_factor=args.nfs_factor),
                        args.out, args.format)
    raise ValidationError(f"unknown command {command!r}")


def _summarize(report, stream):
    verdicts = report.get("verdicts", {})
    for key in sorted(verdicts):
        print(f"{key}: {verdicts[key]}", file=stream)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            scenario = load_scenario(args.scenario)
            report = run_scenario(scenario)
        elif args.command == "ground":
            scenario = _scenario_from_args(args)
            report = run_ground_report(scenario, export_base=args.export)
        else:
            scenario = _scenario_from_args(args)
            report = run_scenario(scenario)
        written = write_report_files(report, scenario)
        if scenario.output_path is None:
            json.dump(report, sys.stdout, sort_keys=True, indent=2)
            print()
        else:
            _summarize(report, sys.stdout)
            for path in written:
                print(f"wrote {path}", file=sys.stderr)
        return 0
    except MacrostabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
