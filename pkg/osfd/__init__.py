import os
import sys
from typing import List, Union

from osfd.approx import ApproxSet, approx_gen
from osfd.bench import run_bench, summarize
from osfd.engine import Design, EngineConfig, EngineState, TraceEntry, run_osfd
from osfd.evaluators import Evaluator, FunctionEvaluator, SubprocessEvaluator
from osfd.exceptions import EvaluatorError, OSFDError, ProtocolError, UsageError
from osfd.filldist import FillRecord, gap_point, local_fill_distances
from osfd.geometry import ScaleRecord, fill_distance, scale_to_unit_box
from osfd.inverse import delta_summary, inverse_lookup
from osfd.perturb import ei_perturbation, expected_improvement, greedy_perturbation
from osfd.rng import SeededRng
from osfd.sampling import maximin_lhd, random_lhd, scrambled_sobol, uniform_ball
from osfd.testbed import Problem, get_problem

try:
    from ._version import version as __version__, version_tuple as __version_info__
except ImportError:  # pragma: no cover
    __version__ = "0.0.0"
    __version_info__ = (0, 0, 0)

PKG_TESTS = os.path.join(os.path.dirname(__file__), "tests")


__all__ = [
    "ApproxSet",
    "Design",
    "EngineConfig",
    "EngineState",
    "Evaluator",
    "EvaluatorError",
    "FillRecord",
    "FunctionEvaluator",
    "OSFDError",
    "Problem",
    "ProtocolError",
    "ScaleRecord",
    "SeededRng",
    "SubprocessEvaluator",
    "TraceEntry",
    "UsageError",
    "approx_gen",
    "delta_summary",
    "ei_perturbation",
    "expected_improvement",
    "fill_distance",
    "gap_point",
    "get_problem",
    "greedy_perturbation",
    "inverse_lookup",
    "local_fill_distances",
    "maximin_lhd",
    "random_lhd",
    "run_bench",
    "run_osfd",
    "scale_to_unit_box",
    "scrambled_sobol",
    "summarize",
    "uniform_ball",
    "__version__",
    "__version_info__",
]


def test(extra_args: Union[str, List[str]] = None) -> None:
    try:
        import pytest
    except ImportError as err:
        raise ImportError("Need pytest>=6 to run tests") from err
    cmd = ["--skip-slow"]
    if extra_args:
        if not isinstance(extra_args, list):
            extra_args = [extra_args]
        assert isinstance(extra_args, list)
        cmd = extra_args
    cmd += [PKG_TESTS]
    joined = " ".join(cmd)
    print(f"running: pytest {joined}")
    sys.exit(pytest.main(cmd))
