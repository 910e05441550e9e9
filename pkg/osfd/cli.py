"""
Command-line interface.

Exit codes: 0 success, 2 configuration or usage error, 3 evaluator
failure, 4 ask/tell protocol misuse.
"""
import argparse
import logging
import sys
from typing import List, Optional

import pandas as pd

from osfd import __version__
from osfd._logging import get_logger
from osfd.bench import run_bench, summarize
from osfd.engine import EngineState, run_osfd
from osfd.evaluators import format_point
from osfd.exceptions import EvaluatorError, OSFDError, UsageError
from osfd.geometry import fill_distance
from osfd.inverse import delta_summary, inverse_lookup
from osfd.io import (
    RunConfig,
    load_state,
    read_design,
    read_points,
    save_state,
    write_design,
    write_frame,
    write_trace,
)

__all__ = ["build_parser", "main"]

logger = logging.getLogger(__name__)


def _trace_path(out: str, trace: Optional[str]) -> str:
    return trace if trace else out + ".trace.json"


def cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig.load(args.config)
    trace_path = _trace_path(args.out, args.trace)
    with config.evaluator() as evaluator:
        try:
            design, trace = run_osfd(evaluator, config.engine)
        except EvaluatorError as err:
            if err.design is not None:
                write_design(err.design, args.out)
                write_trace(err.trace, trace_path, config=config.to_dict(), complete=False)
                logger.warning("wrote partial design of %d runs to %s", len(err.design), args.out)
            raise
    write_design(design, args.out)
    write_trace(trace, trace_path, config=config.to_dict(), complete=True)
    logger.info("wrote design of %d runs to %s", len(design), args.out)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    config = RunConfig.load(args.config)
    problem = config.builtin_problem()
    reference = read_points(args.reference) if args.reference else None
    results = run_bench(
        problem,
        config.engine,
        args.reps,
        args.methods,
        record_every=config.record_every,
        reference=reference,
        reference_size=config.reference_size,
        n_jobs=args.jobs,
    )
    write_frame(results, args.out)
    if args.summary:
        write_frame(summarize(results), args.summary)
    return 0


def cmd_eval_fill(args: argparse.Namespace) -> int:
    design = read_design(args.design)
    reference = read_points(args.reference)
    if reference.shape[1] != design.q:
        raise UsageError(
            f"reference has {reference.shape[1]} columns, design outputs have {design.q}"
        )
    print(f"{fill_distance(reference, design.outputs):.17g}")
    return 0


def cmd_step(args: argparse.Namespace) -> int:
    if args.action == "init":
        config = RunConfig.load(args.config)
        p, q = config.dims
        save_state(EngineState.create(config.engine, p, q), args.state)
        return 0
    state = load_state(args.state)
    if args.action == "next":
        x = state.ask()
        save_state(state, args.state)
        print(format_point(x))
    elif args.action == "tell":
        state.tell(args.values)
        save_state(state, args.state)
        if state.complete:
            logger.info("design complete with %d runs", len(state.design))
    else:
        write_design(state.design, args.out)
    return 0


def cmd_inverse(args: argparse.Namespace) -> int:
    design = read_design(args.design)
    targets = read_points(args.targets)
    if targets.shape[1] != design.q:
        raise UsageError(
            f"targets have {targets.shape[1]} columns, design outputs have {design.q}"
        )
    lookup = inverse_lookup(design, targets)
    if args.out:
        frame = pd.DataFrame(targets, columns=[f"t{j + 1}" for j in range(design.q)])
        for i in range(design.p):
            frame[f"x{i + 1}"] = lookup.inputs[:, i]
        for j in range(design.q):
            frame[f"y{j + 1}"] = lookup.outputs[:, j]
        frame["delta"] = lookup.delta
        write_frame(frame, args.out)
    for key, value in delta_summary(lookup.delta).items():
        print(f"{key} {value:.17g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osfd",
        description="Sequential designs whose outputs fill the output space",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="Log progress (-vv for debug)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Build a sequential design")
    run.add_argument("--config", required=True, help="Run configuration JSON")
    run.add_argument("--out", required=True, help="Design CSV to write")
    run.add_argument("--trace", help="Trace JSON to write. Defaults to OUT.trace.json")
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="Replicated fill-distance comparison")
    bench.add_argument("--config", required=True, help="Run configuration JSON")
    bench.add_argument("--reps", type=int, default=20, help="Number of replications")
    bench.add_argument(
        "--methods", default="greedy,ei,random_lhd", help="Comma-separated methods"
    )
    bench.add_argument("--out", required=True, help="Long-format results CSV")
    bench.add_argument("--summary", help="Optional per-size summary CSV")
    bench.add_argument("--reference", help="Reference output CSV. Generated if omitted")
    bench.add_argument("--jobs", type=int, help="Parallel jobs. Defaults to OSFD_THREADS")
    bench.set_defaults(func=cmd_bench)

    fill = sub.add_parser("eval-fill", help="Fill distance of a design's outputs")
    fill.add_argument("--design", required=True, help="Design CSV")
    fill.add_argument("--reference", required=True, help="Reference point CSV")
    fill.set_defaults(func=cmd_eval_fill)

    step = sub.add_parser("step", help="Ask/tell stepping with a state file")
    step.add_argument("--state", required=True, help="Engine state JSON")
    actions = step.add_subparsers(dest="action", required=True)
    init = actions.add_parser("init", help="Create the state from a configuration")
    init.add_argument("--config", required=True, help="Run configuration JSON")
    actions.add_parser("next", help="Print the next input")
    tell = actions.add_parser("tell", help="Record the output of the pending input")
    tell.add_argument("values", nargs="*", type=float, help="Output values")
    export = actions.add_parser("export", help="Write the current design CSV")
    export.add_argument("--out", required=True, help="Design CSV to write")
    step.set_defaults(func=cmd_step)

    inverse = sub.add_parser("inverse", help="Nearest-output lookup of target outputs")
    inverse.add_argument("--design", required=True, help="Design CSV")
    inverse.add_argument("--targets", required=True, help="Target output CSV")
    inverse.add_argument("--out", help="Lookup CSV to write")
    inverse.set_defaults(func=cmd_inverse)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = None
    if args.verbose:
        level = logging.DEBUG if args.verbose > 1 else logging.INFO
    get_logger(level=level)
    try:
        return args.func(args)
    except OSFDError as err:
        print(f"osfd: error: {err}", file=sys.stderr)
        return err.exit_code
