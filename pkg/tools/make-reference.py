"""
Write the reference output set of a builtin problem as CSV.

The file can be passed to ``osfd eval-fill --reference`` and
``osfd bench --reference`` so that repeated benchmarks skip rebuilding it.
"""

from osfd._logging import get_logger
from osfd.io import write_points
from osfd.rng import SeededRng
from osfd.testbed import get_problem

if __name__ == "__main__":
    import argparse

    logger = get_logger("make-reference", level="INFO")

    parser = argparse.ArgumentParser(
        description="Reference output set of a builtin problem",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "problem",
        type=str,
        help="Problem with parameters, e.g. exponential:alpha=100",
    )
    parser.add_argument(
        "-o", "--out", type=str, required=True, help="Reference CSV to write"
    )
    parser.add_argument(
        "-s",
        "--size",
        type=int,
        default=None,
        help="Approximate number of points. The problem's default if omitted.",
    )
    parser.add_argument(
        "--seed", type=int, default=0, help="Seed of the Sobol scrambling and disk targets"
    )
    args = parser.parse_args()

    problem = get_problem(args.problem)
    reference = problem.reference_outputs(args.size, SeededRng(args.seed))
    write_points(reference, args.out)
    logger.info("wrote %d points of %s to %s", reference.shape[0], problem.spec, args.out)
