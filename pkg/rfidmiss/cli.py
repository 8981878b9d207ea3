"""The rfidmiss command line

    rfidmiss simulate --preset fig2 --out fig2.csv
    rfidmiss correlated --p 0.2 --rho 0.1,0.3 --trials 200
    rfidmiss stop --p 0.1 --threshold 1e-5
    rfidmiss verify
    rfidmiss estimate reads.csv --estimator regm

Every experiment flag can also be given in a `--config` file or as an
environment variable prefixed with `RFIDMISS_`.

Exit codes: 0 on success, 1 when `verify` fails, 2 on an invalid
configuration or input.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Dict, List, Sequence

from . import __version__
from .config import ENV_PREFIX, PRESETS, parse_values, resolve_config
from .experiments import (
    check_target,
    correlated_sweep,
    estimate_history,
    metadata_lines,
    simulate_sweep,
    stop_runs,
    summary_lines,
    verify_lemmas,
    write_csv,
)
from .history import ReadHistory
from .report import Estimator
from .utils import EstimationError, InvalidConfigError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)

# Arguments that are not experiment configuration
_NON_CONFIG = {"command", "verbose", "config", "history", "export_history"}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=argparse.SUPPRESS,
        help="Log progress, twice for debug output",
    )
    return common


def _experiment_parser() -> argparse.ArgumentParser:
    """Flags shared by simulate, correlated and stop

    Defaults are suppressed so that unset flags do not hide the preset,
    the config file or the environment.
    """
    parser = argparse.ArgumentParser(
        add_help=False,
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("--n", help="The number of tags N")
    parser.add_argument(
        "--p",
        action="append",
        help="Error probability, repeatable or comma-separated",
    )
    parser.add_argument(
        "--rho",
        action="append",
        help="Session correlation, repeatable or comma-separated",
    )
    parser.add_argument(
        "--estimator",
        action="append",
        help="One of: " + ", ".join(est.value for est in Estimator),
    )
    parser.add_argument("--r-min", help="The smallest R of a sweep")
    parser.add_argument("--r-max", help="The largest R of a sweep")
    parser.add_argument("--trials", help="Trials per parameter combination")
    parser.add_argument("--seed", help="Seed of trial 0")
    parser.add_argument("--threshold", help="The stop threshold t1")
    parser.add_argument(
        "--margin",
        help="Sessions read after the threshold is met",
    )
    parser.add_argument("--bias", help="Added to p_M before the stop test")
    parser.add_argument(
        "--min-sessions",
        help="Sessions before the first stop decision",
    )
    parser.add_argument("--max-sessions", help="The session cap")
    parser.add_argument("--out", help="Output CSV, stdout if omitted")
    parser.add_argument(
        "--preset",
        help="One of: " + ", ".join(PRESETS),
    )
    parser.add_argument("--jobs", help="Worker processes running the trials")
    parser.add_argument("--config", help="A `key = value` config file")
    return parser


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with every subcommand"""
    parser = argparse.ArgumentParser(
        prog="rfidmiss",
        description="Estimate the probability that an RFID tag was missed.",
        epilog=f"Environment variables prefixed with {ENV_PREFIX} override "
        "the config file, flags override both.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress, twice for debug output",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()
    experiment = _experiment_parser()

    subparsers.add_parser(
        "simulate",
        parents=[common, experiment],
        help="Sweep the estimators over R with independent sessions",
    )
    subparsers.add_parser(
        "correlated",
        parents=[common, experiment],
        help="Sweep the estimators over R with correlated sessions",
    )
    stop = subparsers.add_parser(
        "stop",
        parents=[common, experiment],
        help="Run the sequential stop rule",
    )
    stop.add_argument(
        "--export-history",
        default=None,
        help="Directory for the read histories of trials that missed a tag",
    )
    subparsers.add_parser(
        "verify",
        parents=[common],
        help="Check the exact expectations against the closed forms",
    )
    estimate = subparsers.add_parser(
        "estimate",
        parents=[common],
        help="Estimate from a recorded read history",
        argument_default=argparse.SUPPRESS,
    )
    estimate.add_argument(
        "history",
        help="CSV with tag ids as header and one 0/1 row per session",
    )
    estimate.add_argument("--estimator", action="append")
    estimate.add_argument("--r-min", help="The smallest R to estimate at")
    estimate.add_argument("--out", help="Output CSV, stdout if omitted")
    return parser


def _raw_flags(args: argparse.Namespace) -> Dict[str, Any]:
    """Given flags keyed by their config key, e.g. `r_min` => `r-min`"""
    return {
        dest.replace("_", "-"): value
        for dest, value in vars(args).items()
        if dest not in _NON_CONFIG
    }


def cmd_simulate(args: argparse.Namespace) -> int:
    config = resolve_config(
        "simulate", _raw_flags(args), getattr(args, "config", None)
    )
    check_target(config.out)
    write_csv(
        simulate_sweep(config),
        metadata_lines("simulate", config),
        config.out,
    )
    return 0


def cmd_correlated(args: argparse.Namespace) -> int:
    config = resolve_config(
        "correlated", _raw_flags(args), getattr(args, "config", None)
    )
    check_target(config.out)
    write_csv(
        correlated_sweep(config),
        metadata_lines("correlated", config),
        config.out,
    )
    return 0


def cmd_stop(args: argparse.Namespace) -> int:
    config = resolve_config(
        "stop", _raw_flags(args), getattr(args, "config", None)
    )
    check_target(config.out)
    stops = stop_runs(config, args.export_history)
    write_csv(
        stops,
        metadata_lines("stop", config),
        config.out,
        footer=summary_lines(stops),
    )
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    checks = verify_lemmas()
    for check in checks.itertuples(index=False):
        status = "PASS" if check.passed else "FAIL"
        print(
            f"{check.check} {check.relation} {check.limit:g}: {status} "
            f"({check.value:.6g})"
        )
    return 0 if checks["passed"].all() else 1


def cmd_estimate(args: argparse.Namespace) -> int:
    values = parse_values(_raw_flags(args), "the command line")
    estimators: Sequence[Estimator] = values.get(
        "estimators",
        (Estimator.RME, Estimator.REGM, Estimator.SCHNABEL),
    )
    check_target(values.get("out"))
    try:
        history = ReadHistory.from_csv(args.history)
    except OSError as err:
        raise InvalidConfigError(
            "history", f"cannot read {args.history}: {err}"
        ) from None

    logger.info(
        "Read %d sessions over %d tags from %s",
        history.sessions,
        history.n_tags,
        args.history,
    )
    header = metadata_lines("estimate") + [f"# history={args.history}"]
    write_csv(
        estimate_history(history, estimators, values.get("r_min", 2)),
        header,
        values.get("out"),
    )
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "correlated": cmd_correlated,
    "stop": cmd_stop,
    "verify": cmd_verify,
    "estimate": cmd_estimate,
}


def main(argv: List[str] = None) -> int:
    """Run the command line, returns the exit code"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        format=LOG_FORMAT,
        level=LOG_LEVELS[min(args.verbose, len(LOG_LEVELS) - 1)],
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except InvalidConfigError as err:
        print(f"rfidmiss {args.command}: error: {err}", file=sys.stderr)
        return 2
    except (EstimationError, ValueError) as err:
        print(
            f"rfidmiss {args.command}: invalid input: {err}", file=sys.stderr
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
