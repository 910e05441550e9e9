"""
Fill-distance benchmark of sequential and input space-filling designs.

For every seed and method a design is built and the fill distance of its
outputs against a dense reference set is recorded at a grid of run sizes.
The sequential methods (``greedy``, ``ei``) are run once to the final size
and measured on nested prefixes. The input space-filling methods
(``random_lhd``, ``maximin_lhd``) draw an independent design of every
recorded size.
"""
from dataclasses import replace
import logging
import os
from typing import Dict, List, Optional, Sequence, Union

from joblib import Parallel, cpu_count, delayed
import numpy as np
import pandas as pd

from osfd.engine import EngineConfig, run_osfd
from osfd.exceptions import UsageError
from osfd.geometry import fill_distance
from osfd.rng import SeededRng
from osfd.sampling import maximin_lhd, random_lhd
from osfd.testbed import Problem
from osfd.typing import FloatArray

__all__ = [
    "METHODS",
    "parse_methods",
    "record_sizes",
    "run_bench",
    "run_replication",
    "summarize",
    "thread_count",
]

logger = logging.getLogger(__name__)

METHODS = ("greedy", "ei", "random_lhd", "maximin_lhd")
COLUMNS = ["method", "seed", "n", "fill"]
REFERENCE_SEED = 0


def parse_methods(methods: Union[str, Sequence[str]]) -> List[str]:
    """Comma-separated or listed method names, checked and deduplicated"""
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    out: List[str] = []
    for method in methods:
        if method not in METHODS:
            raise UsageError(f"{method!r} is not a known method; choose from {METHODS}")
        if method not in out:
            out.append(method)
    if not out:
        raise UsageError("at least one method is required")
    return out


def record_sizes(n0: int, n: int, every: int) -> List[int]:
    """Sizes ``n0, n0 + every, ...`` followed by ``n``"""
    if every < 1:
        raise UsageError(f"every must be >= 1, got {every}")
    return sorted(set(range(n0, n + 1, every)) | {n})


def thread_count() -> int:
    """Number of parallel jobs, capped by ``OSFD_THREADS``"""
    value = os.environ.get("OSFD_THREADS")
    if not value:
        return cpu_count()
    try:
        threads = int(value)
    except ValueError as err:
        raise UsageError(f"OSFD_THREADS must be an integer, got {value!r}") from err
    if threads < 1:
        raise UsageError(f"OSFD_THREADS must be >= 1, got {threads}")
    return threads


def run_replication(
    problem: Problem,
    config: EngineConfig,
    method: str,
    seed: int,
    sizes: Sequence[int],
    reference: FloatArray,
) -> List[Dict[str, object]]:
    """
    Fill distances of one (method, seed) design at every recorded size

    Parameters
    ----------
    problem : Problem
        Builtin problem
    config : EngineConfig
        Base settings; method and seed are replaced
    method : str
        One of :data:`METHODS`
    seed : int
        Seed of the replication
    sizes : Sequence[int]
        Recorded run sizes
    reference : ndarray
        Reference output set

    Returns
    -------
    list[dict]
        Rows with keys ``method``, ``seed``, ``n``, ``fill``
    """
    rows: List[Dict[str, object]] = []
    if method in ("greedy", "ei"):
        design, _ = run_osfd(problem.evaluator(), replace(config, method=method, seed=seed))
        for n in sizes:
            if n > len(design):
                break
            fill = fill_distance(reference, design.outputs[:n])
            rows.append({"method": method, "seed": seed, "n": n, "fill": fill})
    else:
        rng = SeededRng(seed)
        for n in sizes:
            if method == "maximin_lhd":
                inputs = maximin_lhd(n, problem.p, rng, config.maximin_iters)
            else:
                inputs = random_lhd(n, problem.p, rng)
            fill = fill_distance(reference, problem(inputs))
            rows.append({"method": method, "seed": seed, "n": n, "fill": fill})
    logger.info("finished %s seed=%d", method, seed)
    return rows


def run_bench(
    problem: Problem,
    config: EngineConfig,
    reps: int,
    methods: Union[str, Sequence[str]],
    record_every: int = 10,
    reference: Optional[FloatArray] = None,
    reference_size: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> pd.DataFrame:
    """
    Replicated fill-distance comparison

    Parameters
    ----------
    problem : Problem
        Builtin problem
    config : EngineConfig
        Base settings of the sequential methods
    reps : int
        Number of replications; seeds are ``1..reps``
    methods : {str, Sequence[str]}
        Methods to compare
    record_every : int
        Spacing of the recorded run sizes
    reference : ndarray, optional
        Reference output set. Built from the problem if omitted.
    reference_size : int, optional
        Size of the generated reference set
    n_jobs : int, optional
        Parallel jobs. Defaults to :func:`thread_count`.

    Returns
    -------
    DataFrame
        Long-format results with columns ``method, seed, n, fill`` sorted by
        method, seed and n
    """
    if reps < 1:
        raise UsageError(f"reps must be >= 1, got {reps}")
    methods = parse_methods(methods)
    config.validate(problem.p, problem.q)
    if reference is None:
        reference = problem.reference_outputs(reference_size, SeededRng(REFERENCE_SEED))
    reference = np.asarray(reference, dtype=float)
    if reference.ndim != 2 or reference.shape[1] != problem.q:
        raise UsageError(f"reference must have {problem.q} columns")
    sizes = record_sizes(config.n0, config.n, record_every)
    jobs = [(method, seed) for method in methods for seed in range(1, reps + 1)]
    n_jobs = thread_count() if n_jobs is None else n_jobs
    n_jobs = max(1, min(n_jobs, len(jobs)))
    logger.info("running %d replications on %d jobs", len(jobs), n_jobs)
    results = Parallel(n_jobs)(
        delayed(run_replication)(problem, config, method, seed, sizes, reference)
        for method, seed in jobs
    )
    rows = [row for rep in results for row in rep]
    frame = pd.DataFrame(rows, columns=COLUMNS)
    frame = frame.sort_values(["method", "seed", "n"], kind="stable")
    return frame.reset_index(drop=True)


def summarize(results: pd.DataFrame) -> pd.DataFrame:
    """
    Mean and 5%/95% quantiles of the fill distance per method and size

    Parameters
    ----------
    results : DataFrame
        Output of :func:`run_bench`

    Returns
    -------
    DataFrame
        Columns ``method, n, mean, q05, q95``
    """
    grouped = results.groupby(["method", "n"])["fill"]
    summary = pd.DataFrame(
        {
            "mean": grouped.mean(),
            "q05": grouped.quantile(0.05),
            "q95": grouped.quantile(0.95),
        }
    )
    return summary.reset_index()
