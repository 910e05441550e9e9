import timeit

import pandas as pd

SETUP = """
import numpy as np
from osfd.engine import EngineConfig, EngineState
from osfd.testbed import get_problem

problem = get_problem("{problem}")
config = EngineConfig(n={size} + 1, n0={size}, method="{method}", seed=0)
state = EngineState.create(config, problem.p, problem.q)
for row in state.initial:
    state.ask()
    state.tell(problem(row))
"""

STEP = """
record = state.fill_record(state.design, state.rng)
propose(state.design.inputs, record, state.rng, "{method}")
"""

PROBLEMS = ["inverse_radius", "exponential:alpha=100", "easom:p=8", "robot_arm"]
METHODS = ["greedy", "ei"]


def timer(code, setup):
    return 1000 * min(timeit.Timer(code, setup=setup).repeat(5, 1))


def print_legend(legend):
    print("\n" + legend + "\n" + "*" * max(60, len(legend)))


def run_timer(size):
    print("-" * 80)
    res = {}
    for problem in PROBLEMS:
        for method in METHODS:
            setup = SETUP.format(problem=problem, size=size, method=method)
            setup += "from osfd.perturb import propose\n"
            res[(problem, method)] = timer(STEP.format(method=method), setup)

    s = pd.Series(res).unstack()
    print_legend(f"Time of one sequential step at {size} runs")
    print(s.apply(lambda col: col.map("{0:0.1f} ms".format)))

    ratio = s["ei"] / s["greedy"]
    print_legend("EI relative to greedy")
    print(ratio.map("{0:0.2f}x".format))
    print("-" * 80)


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(
        description="Time the fill record and proposal of one sequential step",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument(
        "-s",
        "--sizes",
        help="Comma-separated design sizes at which a step is timed.",
        default="50,150",
    )
    parser.add_argument(
        "-f",
        "--full",
        help="Also time a step at 300 runs.",
        dest="full",
        action="store_true",
    )
    args = parser.parse_args()

    sizes = [int(v) for v in args.sizes.split(",")]
    if args.full:
        sizes.append(300)
    for size in sizes:
        run_timer(size)
