"""Command-line entry point: ``eqfree <experiment> [options]``.

Exit status is 0 on success, 2 for invalid input and 3 for numerical
failure (divergence, stiffness, non-finite states).
"""

import argparse
import json
import sys

from ..errors import ConfigurationError, NumericalError, StabilityError
from ..systems import SYSTEMS
from . import experiments as ex
from .output import render

# experiment -> (runner, default algorithm, model system)
EXPERIMENTS = {
    "slowfast-pig": (ex.run_slowfast_pig, "pig", "slowfast"),
    "stiff-scaling": (ex.run_stiff_scaling, "pirk4", "stiff-linear"),
    "patch-diffusion2d": (ex.run_patch_diffusion2, "patch2d", "nonlin-diffusion-2d"),
    "convergence": (ex.run_convergence, "patch1d", "heat-1d"),
    "stability-map": (ex.run_stability_map, "pirk4", None),
}


def _tspan(text):
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="eqfree", description="Projective integration and patch scheme experiments.")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--system", choices=sorted(SYSTEMS), help="model system (must match the experiment)")
    p.add_argument("--algorithm", choices=ex.ALGORITHMS, help="override the experiment's default algorithm")
    p.add_argument("--beta", type=float, help="fast rate of the slow-fast model")
    p.add_argument("--burst", type=float, help="burst length delta")
    p.add_argument("--dt-macro", type=float, help="projective macro step Delta")
    p.add_argument("--tspan", type=_tspan, help="time interval a:b")
    p.add_argument("--rtol", type=float, help="macro tolerance")
    p.add_argument("--projection", choices=("restrict", "full"),
                   help="slowfast-pig: extrapolate only u1 (restrict) or the whole state (full)")
    p.add_argument("--n-fast", type=_int_list, help="fast dimensions for stiff-scaling, e.g. 0,10,20,40")
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--parallel", type=int, default=1, metavar="K", help="worker threads for sweeps")
    return p


def spec_from_args(args):
    run, default_algo, system = EXPERIMENTS[args.experiment]
    if args.system is not None and args.system != system:
        raise ConfigurationError(f"{args.experiment} runs the {system!r} system, not {args.system!r}")
    params = {
        "beta": args.beta,
        "burst": args.burst,
        "dt_macro": args.dt_macro,
        "tspan": args.tspan,
        "rtol": args.rtol,
        "n_fast": args.n_fast,
        "repeats": args.repeats,
        "projection": args.projection,
    }
    if args.experiment == "stiff-scaling" and args.algorithm:
        params["algorithms"] = [args.algorithm]
    params = {k: v for k, v in params.items() if v is not None}
    spec = ex.ExperimentSpec(
        name=args.experiment,
        algorithm=args.algorithm or default_algo,
        params=params,
        seed=args.seed,
        out=args.out,
        format=args.format,
        parallel=args.parallel,
    )
    return run, spec


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        run, spec = spec_from_args(args)
        report = run(spec)
    except ConfigurationError as exc:
        print(f"eqfree: invalid input: {exc}", file=sys.stderr)
        return 2
    except (StabilityError, NumericalError) as exc:
        print(f"eqfree: numerical failure: {exc}", file=sys.stderr)
        return 3
    text = render(spec, report)
    if spec.out:
        with open(spec.out, "w") as fh:
            fh.write(text)
        print(json.dumps(report.summary, default=str), file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
