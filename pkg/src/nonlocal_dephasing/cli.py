"""
Command line tool: simulate, fit, sweep, synth and nonmarkov.

Exit codes: 0 success, 2 invalid configuration or input, 1 runtime failure.
"""
import argparse
import json
import logging
import sys
import typing

import pandas as pd

from .analysis.fitting import FitResult, fit_consecutive
from .analysis.nonmarkovianity import blp_measure
from .analysis.trajectory import TraceDistanceTrajectory
from .config import RunConfig, load_config
from .schedule import ARM_MAX, STANDARD_OFFSETS, PlateSchedule, sample_points, trajectory
from .synthlab import synth_experiment
from .utils.exceptions import iter_leaf_exceptions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2

DEFAULT_TRAJECTORY = "trajectory.csv"
DEFAULT_SWEEP = "sweep.csv"


def _overrides(args: argparse.Namespace) -> dict[str, typing.Any]:
    return {"seed": args.seed, "out": args.out, "step": args.step, "offset": args.offset}


def _config(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        raise ValueError(f"{args.command}: --config is required")
    return load_config(args.config, _overrides(args))


def _simulate(config: RunConfig, offset: float | None = None) -> TraceDistanceTrajectory:
    schedule = config.schedule() if offset is None else PlateSchedule(offset)
    result = trajectory(config.model(), schedule, config.step)
    return result.scaled(config.a) if config.a != 1.0 else result


def _write_fit(result: FitResult, path: str | None):
    text = result.to_json(indent=2)
    if path is None:
        print(text)
    else:
        logger.info("Write fit result to %s", path)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + "\n")


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _config(args)
    result = _simulate(config)
    result.to_csv(config.out or DEFAULT_TRAJECTORY)
    print(json.dumps({"N": blp_measure(result), "final_D": float(result.d[-1])}))
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    data = TraceDistanceTrajectory.from_csv(args.csv)
    result = fit_consecutive(data, split=args.split)
    _write_fit(result, args.out)
    stderr = f"{result.k_stderr:.2g}" if result.k_stderr is not None else "n/a"
    print(f"K = {result.k:.6f} +- {stderr}", file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _config(args)
    offsets = args.offsets or config.offsets or list(STANDARD_OFFSETS)
    frames = []
    summary = []
    for offset in offsets:
        result = _simulate(config, offset)
        frame = result.to_frame()[["x_lambda0", "D"]]
        frame.insert(0, "offset", offset)
        frames.append(frame)
        summary.append({"offset": offset, "N": blp_measure(result), "final_D": float(result.d[-1])})
    pd.concat(frames, ignore_index=True).to_csv(
        config.out or DEFAULT_SWEEP, index=False, float_format="%.17g", encoding="utf-8"
    )
    print(pd.DataFrame(summary).to_csv(index=False), end="")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    config = _config(args)
    if config.total_expected is None:
        raise ValueError(f"{args.config}: synth needs total_expected")
    points = config.points if config.points is not None else sample_points(config.step)
    noisy = synth_experiment(config.model(), config.schedule(), points, config.total_expected,
                             config.seed, config.duration)
    noisy.to_csv(config.out or DEFAULT_TRAJECTORY)
    _write_fit(fit_consecutive(noisy, split=ARM_MAX, allow_degenerate=True), config.fit_out)
    return EXIT_OK


def cmd_nonmarkov(args: argparse.Namespace) -> int:
    data = TraceDistanceTrajectory.from_csv(args.csv)
    if args.window is not None:
        low, high = args.window
        data = data.select((data.x >= low) & (data.x <= high))
        logger.info("Keep %s points in [%s, %s]", len(data), low, high)
    print(json.dumps({"N": blp_measure(data), "final_D": float(data.d[-1])}))
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="random seed, overrides the configuration")
    common.add_argument("--out", help="output path, overrides the configuration")
    common.add_argument("--step", type=float, help="sampling step in lambda0, overrides the configuration")
    common.add_argument("--offset", type=float, help="plate offset in lambda0, overrides the configuration")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    parser = argparse.ArgumentParser(prog="nonlocal-dephasing", description=__doc__.strip().splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("simulate", parents=[common], help="noiseless trajectory of the Bell pair") \
        .set_defaults(handler=cmd_simulate)

    fit = commands.add_parser("fit", parents=[common], help="two-stage fit of a consecutive curve")
    fit.add_argument("csv", help="trajectory CSV with columns x_lambda0, D and optional d_err")
    fit.add_argument("--split", type=float, default=ARM_MAX, help="path difference where arm 2 starts")
    fit.set_defaults(handler=cmd_fit)

    sweep = commands.add_parser("sweep", parents=[common], help="trajectories for several plate offsets")
    sweep.add_argument("--offsets", type=float, nargs="+", help="offsets in lambda0")
    sweep.set_defaults(handler=cmd_sweep)

    commands.add_parser("synth", parents=[common], help="noisy synthetic experiment and its fit") \
        .set_defaults(handler=cmd_synth)

    nonmarkov = commands.add_parser("nonmarkov", parents=[common], help="non-Markovianity of a trajectory CSV")
    nonmarkov.add_argument("csv", help="trajectory CSV")
    nonmarkov.add_argument("--window", type=float, nargs=2, metavar=("LOW", "HIGH"),
                           help="only use points with LOW <= x <= HIGH")
    nonmarkov.set_defaults(handler=cmd_nonmarkov)
    return parser


def _report(exc: BaseException):
    for item in iter_leaf_exceptions(exc):
        print(f"error: {item}", file=sys.stderr)
        for note in getattr(item, "__notes__", ()):
            print(f"  {note}", file=sys.stderr)


def main(argv: typing.Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level={0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except (ValueError, TypeError, ExceptionGroup) as exc:
        logger.debug("Invalid input", exc_info=exc)
        _report(exc)
        return EXIT_INVALID
    except Exception as exc:
        logger.debug("Command failed", exc_info=exc)
        _report(exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
