import numpy as np
from numpy.testing import assert_, assert_array_equal, assert_equal
import pytest

from osfd.engine import Design, EngineConfig, EngineState, run_osfd
from osfd.evaluators import FunctionEvaluator
from osfd.exceptions import EvaluatorError, ProtocolError, UsageError
from osfd.rng import SeededRng
from osfd.sampling import maximin_lhd, random_lhd
from osfd.testbed import PROBLEMS, get_problem

SMALL = {
    "inverse_radius": (8, 12),
    "exponential": (8, 12),
    "easom": (6, 10),
    "robot_arm": (10, 13),
}


def ask_tell(problem, config):
    state = EngineState.create(config, problem.p, problem.q)
    while not state.complete:
        state.tell(problem(state.ask()))
    return state


@pytest.fixture(params=sorted(PROBLEMS))
def problem(request):
    return get_problem(request.param)


@pytest.mark.parametrize("method", ["greedy", "ei"])
def test_ask_tell_matches_run(problem, method):
    n0, n = SMALL[problem.name]
    config = EngineConfig(n=n, n0=n0, method=method, seed=11)
    design, trace = run_osfd(problem.evaluator(), config)
    state = ask_tell(problem, config)
    assert_equal(len(design), n)
    assert_(design.inputs.tobytes() == state.design.inputs.tobytes())
    assert_(design.outputs.tobytes() == state.design.outputs.tobytes())
    assert_equal([t.size for t in trace], list(range(n0, n)))
    assert_equal([t[:4] for t in trace], [t[:4] for t in state.trace])


def test_initial_design_is_lhd():
    problem = get_problem("exponential")
    config = EngineConfig(n=10, n0=6, seed=3)
    state = EngineState.create(config, 2, 3)
    expected = random_lhd(6, 2, SeededRng(3))
    for row in expected:
        x = state.ask()
        assert_array_equal(x, row)
        state.tell(problem(x))
    assert_(state.record is not None)


def test_maximin_init():
    config = EngineConfig(n=5, n0=5, seed=2, init="maximin_lhd", maximin_iters=20)
    design, trace = run_osfd(get_problem("exponential").evaluator(), config)
    assert_array_equal(design.inputs, maximin_lhd(5, 2, SeededRng(2), 20))
    assert_equal(trace, [])


def test_no_sequential_steps():
    design, trace = run_osfd(get_problem("easom").evaluator(), EngineConfig(n=4, n0=4))
    assert_equal(len(design), 4)
    assert_equal(trace, [])


def test_deterministic():
    problem = get_problem("inverse_radius")
    config = EngineConfig(n=12, n0=8, method="ei", seed=5)
    first, _ = run_osfd(problem.evaluator(), config)
    second, _ = run_osfd(problem.evaluator(), config)
    assert_(first.inputs.tobytes() == second.inputs.tobytes())
    other, _ = run_osfd(problem.evaluator(), EngineConfig(n=12, n0=8, method="ei", seed=6))
    assert_(not np.array_equal(first.inputs, other.inputs))


@pytest.mark.parametrize("method", ["greedy", "ei"])
def test_distinct_inputs(method):
    problem = get_problem("exponential:alpha=100")
    design, _ = run_osfd(problem.evaluator(), EngineConfig(n=30, n0=10, method=method))
    assert_(np.all((design.inputs >= 0) & (design.inputs <= 1)))
    assert_equal(np.unique(design.inputs, axis=0).shape[0], 30)


def test_trace_fill_matches_record():
    problem = get_problem("inverse_radius")
    state = EngineState.create(EngineConfig(n=14, n0=8), 2, 2)
    while not state.complete:
        record = state.record
        x = state.ask()
        state.tell(problem(x))
        if record is not None:
            assert_equal(state.trace[-1].fill, record.global_fill)
            assert_equal(state.trace[-1].i_star, record.i_star)
    assert_equal(len(state.trace), 14 - 8)


def test_ask_twice():
    state = EngineState.create(EngineConfig(n=6, n0=4), 2, 3)
    state.ask()
    with pytest.raises(ProtocolError):
        state.ask()


def test_tell_without_ask():
    state = EngineState.create(EngineConfig(n=6, n0=4), 2, 3)
    with pytest.raises(ProtocolError):
        state.tell([1.0, 2.0, 3.0])


def test_tell_wrong_arity():
    state = EngineState.create(EngineConfig(n=6, n0=4), 2, 3)
    state.ask()
    with pytest.raises(ProtocolError, match="expected 3"):
        state.tell([1.0, 2.0])


def test_tell_non_finite_keeps_pending():
    state = EngineState.create(EngineConfig(n=6, n0=4), 2, 3)
    x = state.ask()
    with pytest.raises(UsageError, match="non-finite"):
        state.tell([1.0, np.nan, 3.0])
    assert_array_equal(state.pending, x)
    assert_equal(len(state.design), 0)
    state.tell([1.0, 2.0, 3.0])
    assert_equal(len(state.design), 1)


def test_ask_when_complete():
    problem = get_problem("exponential")
    state = ask_tell(problem, EngineConfig(n=5, n0=4))
    assert_(state.complete)
    with pytest.raises(UsageError, match="complete"):
        state.ask()


@pytest.mark.parametrize("stop_after", [3, 8, 10])
def test_json_resume(stop_after):
    problem = get_problem("exponential")
    config = EngineConfig(n=13, n0=6, method="ei", seed=4)
    full = ask_tell(problem, config)
    state = EngineState.create(config, 2, 3)
    for _ in range(stop_after):
        state.tell(problem(state.ask()))
    state = EngineState.from_json(state.to_json())
    while not state.complete:
        state.tell(problem(state.ask()))
    assert_(state.design.inputs.tobytes() == full.design.inputs.tobytes())
    assert_equal([t[:4] for t in state.trace], [t[:4] for t in full.trace])


def test_json_resume_pending():
    problem = get_problem("inverse_radius")
    config = EngineConfig(n=12, n0=6, seed=9)
    full = ask_tell(problem, config)
    state = EngineState.create(config, 2, 2)
    for _ in range(8):
        state.tell(problem(state.ask()))
    x = state.ask()
    state = EngineState.from_json(state.to_json())
    assert_array_equal(state.pending, x)
    with pytest.raises(ProtocolError):
        state.ask()
    state.tell(problem(x))
    while not state.complete:
        state.tell(problem(state.ask()))
    assert_(state.design.inputs.tobytes() == full.design.inputs.tobytes())
    assert_equal(len(state.trace), len(full.trace))


def test_bad_state():
    with pytest.raises(UsageError, match="JSON"):
        EngineState.from_json("{not json")
    with pytest.raises(UsageError, match="invalid engine state"):
        EngineState.from_dict({"p": 2})
    state = EngineState.create(EngineConfig(n=6, n0=4), 2, 3).to_dict()
    state["version"] = 99
    with pytest.raises(UsageError, match="version"):
        EngineState.from_dict(state)


def test_stop_fill():
    problem = get_problem("inverse_radius")
    design, trace = run_osfd(problem.evaluator(), EngineConfig(n=20, n0=8, stop_fill=1e6))
    assert_equal(len(design), 8)
    assert_equal(trace, [])
    state = ask_tell(problem, EngineConfig(n=20, n0=8, stop_fill=1e6))
    assert_(state.stopped)


def test_stop_fill_never_reached():
    problem = get_problem("inverse_radius")
    design, trace = run_osfd(problem.evaluator(), EngineConfig(n=10, n0=8, stop_fill=0.0))
    assert_equal(len(design), 10)
    assert_equal(len(trace), 2)


def test_evaluator_failure_keeps_partial_design():
    calls = []

    def func(x):
        calls.append(x)
        if len(calls) == 7:
            raise RuntimeError("simulator crashed")
        return [x.sum(), x.prod()]

    with pytest.raises(EvaluatorError, match="crashed") as info:
        run_osfd(FunctionEvaluator(func, 2, 2), EngineConfig(n=10, n0=5))
    assert_equal(len(info.value.design), 6)
    assert_equal(len(info.value.trace), 1)


def test_evaluator_non_finite():
    evaluator = FunctionEvaluator(lambda x: [np.inf, 0.0], 2, 2)
    with pytest.raises(EvaluatorError) as info:
        run_osfd(evaluator, EngineConfig(n=6, n0=4))
    assert_equal(len(info.value.design), 0)


def test_config_validation():
    with pytest.raises(UsageError, match="n0"):
        EngineConfig(n=4, n0=5)
    with pytest.raises(UsageError, match="n0"):
        EngineConfig(n=4, n0=1)
    with pytest.raises(UsageError, match="method"):
        EngineConfig(n=10, n0=5, method="random")
    with pytest.raises(UsageError, match="init"):
        EngineConfig(n=10, n0=5, init="sobol")
    with pytest.raises(UsageError, match="integer"):
        EngineConfig(n=10.5, n0=5)
    with pytest.raises(UsageError, match="k2"):
        EngineConfig(n=10, n0=5, k2=0)
    with pytest.raises(UsageError, match="stop_fill"):
        EngineConfig(n=10, n0=5, stop_fill=float("nan"))
    with pytest.raises(UsageError, match="min"):
        EngineState.create(EngineConfig(n=10, n0=3), 8, 4)


def test_config_dict():
    config = EngineConfig(n=10, n0=5, method="ei", k1=3)
    assert_equal(EngineConfig.from_dict(config.to_dict()), config)
    with pytest.raises(UsageError, match="unknown"):
        EngineConfig.from_dict({"n": 10, "n0": 5, "colour": "red"})


def test_design():
    design = Design(2, 1)
    assert_equal(len(design), 0)
    design.append([0.5, 0.5], [1.0])
    design.append([0.1, 0.9], [2.0])
    assert_equal(len(design.prefix(1)), 1)
    assert_array_equal(design.prefix(1).outputs, [[1.0]])
    with pytest.raises(UsageError):
        design.append([1.5, 0.5], [1.0])
    with pytest.raises(UsageError):
        design.prefix(3)
    with pytest.raises(UsageError, match="unit hypercube"):
        Design(1, 1, [[2.0]], [[0.0]])
    with pytest.raises(UsageError, match="outputs"):
        Design(1, 1, [[0.2], [0.3]], [[0.0]])
