from dataclasses import replace

import numpy as np
from numpy.testing import assert_, assert_allclose, assert_equal
import pandas as pd
import pytest

from osfd.bench import (
    COLUMNS,
    parse_methods,
    record_sizes,
    run_bench,
    run_replication,
    summarize,
    thread_count,
)
from osfd.engine import Design, EngineConfig, run_osfd
from osfd.exceptions import UsageError
from osfd.geometry import fill_distance
from osfd.inverse import inverse_lookup
from osfd.rng import SeededRng
from osfd.sampling import maximin_lhd, random_lhd
from osfd.testbed import get_problem


@pytest.fixture(scope="module")
def small_bench():
    problem = get_problem("exponential")
    config = EngineConfig(n=20, n0=10)
    reference = problem.reference_outputs(2500)
    results = run_bench(
        problem, config, 2, "greedy,random_lhd", record_every=5, reference=reference, n_jobs=1
    )
    return problem, config, reference, results


def test_record_sizes():
    assert_equal(record_sizes(10, 30, 10), [10, 20, 30])
    assert_equal(record_sizes(10, 35, 10), [10, 20, 30, 35])
    assert_equal(record_sizes(5, 5, 3), [5])
    with pytest.raises(UsageError):
        record_sizes(5, 10, 0)


def test_parse_methods():
    assert_equal(parse_methods("greedy, ei,greedy"), ["greedy", "ei"])
    assert_equal(parse_methods(["maximin_lhd"]), ["maximin_lhd"])
    with pytest.raises(UsageError, match="not a known method"):
        parse_methods("greedy,sobol")
    with pytest.raises(UsageError, match="at least one"):
        parse_methods(" , ")


def test_thread_count(monkeypatch):
    monkeypatch.setenv("OSFD_THREADS", "3")
    assert_equal(thread_count(), 3)
    monkeypatch.setenv("OSFD_THREADS", "zero")
    with pytest.raises(UsageError):
        thread_count()
    monkeypatch.delenv("OSFD_THREADS")
    assert_(thread_count() >= 1)


def test_results_layout(small_bench):
    _, _, _, results = small_bench
    assert_equal(list(results.columns), COLUMNS)
    assert_equal(len(results), 2 * 2 * 3)
    assert_equal(sorted(results["method"].unique()), ["greedy", "random_lhd"])
    assert_equal(sorted(results["seed"].unique()), [1, 2])
    assert_equal(sorted(results["n"].unique()), [10, 15, 20])
    ordered = results.sort_values(["method", "seed", "n"], kind="stable")
    assert_equal(results.index.tolist(), ordered.index.tolist())


def test_sequential_fill_is_monotone(small_bench):
    _, _, _, results = small_bench
    for _, group in results[results["method"] == "greedy"].groupby("seed"):
        fill = group.sort_values("n")["fill"].to_numpy()
        assert_(np.all(np.diff(fill) <= 0))


def test_isfd_rows(small_bench):
    problem, config, reference, results = small_bench
    rng = SeededRng(2)
    expected = [fill_distance(reference, problem(random_lhd(n, 2, rng))) for n in (10, 15, 20)]
    rows = results[(results["method"] == "random_lhd") & (results["seed"] == 2)]
    assert_allclose(rows["fill"].to_numpy(), expected)


def test_replication_matches_bench(small_bench):
    problem, config, reference, results = small_bench
    rows = run_replication(problem, config, "greedy", 1, [10, 15, 20], reference)
    fill = results[(results["method"] == "greedy") & (results["seed"] == 1)]["fill"]
    assert_equal([row["fill"] for row in rows], fill.tolist())


def test_parallel_matches_serial(small_bench):
    problem, config, reference, results = small_bench
    parallel = run_bench(
        problem, config, 2, "greedy,random_lhd", record_every=5, reference=reference, n_jobs=2
    )
    pd.testing.assert_frame_equal(parallel, results)


def test_summarize(small_bench):
    _, _, _, results = small_bench
    summary = summarize(results)
    assert_equal(list(summary.columns), ["method", "n", "mean", "q05", "q95"])
    assert_equal(len(summary), 2 * 3)
    assert_(np.all(summary["q05"] <= summary["mean"]))
    assert_(np.all(summary["mean"] <= summary["q95"]))


def test_run_bench_errors():
    problem = get_problem("exponential")
    config = EngineConfig(n=12, n0=10)
    with pytest.raises(UsageError, match="reps"):
        run_bench(problem, config, 0, "greedy")
    with pytest.raises(UsageError, match="columns"):
        run_bench(problem, config, 1, "greedy", reference=np.zeros((5, 2)), n_jobs=1)


def final_fill(spec, n0, n, reps, methods):
    problem = get_problem(spec)
    results = run_bench(problem, EngineConfig(n=n, n0=n0), reps, methods)
    return results[results["n"] == n].groupby("method")["fill"].mean()


@pytest.mark.slow
def test_inverse_radius_osfd_beats_lhd():
    final = final_fill("inverse_radius:eps=0.1", 10, 150, 20, "greedy,ei,random_lhd")
    assert_(final["greedy"] <= 0.6 * final["random_lhd"])
    assert_(final["ei"] <= 0.6 * final["random_lhd"])


@pytest.mark.slow
def test_exponential_osfd_beats_lhd():
    final = final_fill("exponential:alpha=10", 50, 300, 10, "greedy,ei,random_lhd")
    assert_(final["greedy"] < final["random_lhd"])
    assert_(final["ei"] < final["random_lhd"])


@pytest.mark.slow
def test_exponential_ei_finds_active_region():
    final = final_fill("exponential:alpha=100", 30, 300, 10, "greedy,ei")
    assert_(final["ei"] <= 0.8 * final["greedy"])
    problem = get_problem("exponential:alpha=100")
    design, _ = run_osfd(problem.evaluator(), EngineConfig(n=300, n0=30, method="ei"))
    assert_(np.any(np.all(design.inputs <= 0.04, axis=1)))


@pytest.mark.slow
def test_robot_arm_lookup_beats_maximin():
    problem = get_problem("robot_arm")
    targets = problem.reference_outputs()
    config = EngineConfig(n=300, n0=30, init="maximin_lhd")
    osfd, isfd = [], []
    for seed in range(1, 6):
        design, _ = run_osfd(problem.evaluator(), replace(config, seed=seed))
        osfd.append(np.median(inverse_lookup(design, targets).delta))
        inputs = maximin_lhd(300, 8, SeededRng(seed))
        lhd = Design(8, 2, inputs, problem(inputs))
        isfd.append(np.median(inverse_lookup(lhd, targets).delta))
    assert_(np.mean(osfd) < np.mean(isfd))
