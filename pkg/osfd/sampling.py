"""
Random and quasi-random designs on the unit hypercube and in balls.

All samplers are pure functions of their arguments and the state of the
:class:`~osfd.rng.SeededRng` they are given.
"""
import logging
from typing import Optional
import warnings

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import qmc

from osfd.exceptions import UsageError
from osfd.geometry import as_points
from osfd.rng import SeededRng
from osfd.typing import ArrayLike, FloatArray

__all__ = [
    "DEFAULT_MAXIMIN_ITERS",
    "lhd_strata",
    "maximin_lhd",
    "min_pairwise_distance",
    "random_lhd",
    "scrambled_sobol",
    "uniform_ball",
    "uniform_cube",
]

logger = logging.getLogger(__name__)

DEFAULT_MAXIMIN_ITERS = 1000
ORTHONORMAL_TOL = 1e-8


def _check_size(n: int, p: int, min_n: int = 1) -> None:
    if int(n) != n or n < min_n:
        raise UsageError(f"n must be an integer >= {min_n}, got {n}")
    if int(p) != p or p < 1:
        raise UsageError(f"p must be a positive integer, got {p}")


def random_lhd(n: int, p: int, rng: SeededRng) -> FloatArray:
    """
    Random Latin hypercube design

    Parameters
    ----------
    n : int
        Number of points
    p : int
        Dimension
    rng : SeededRng
        Random stream

    Returns
    -------
    ndarray
        Array with shape (n, p). In every column exactly one point falls
        in each stratum ``[j/n, (j+1)/n)``.
    """
    _check_size(n, p)
    sampler = qmc.LatinHypercube(d=p, seed=rng.generator)
    return sampler.random(n)


def lhd_strata(design: ArrayLike) -> np.ndarray:
    """
    Stratum index of every coordinate of a design

    Parameters
    ----------
    design : array_like
        Design with shape (n, p) in [0, 1)

    Returns
    -------
    ndarray
        Integer array with the same shape holding ``floor(n * x)``
    """
    design = as_points(design, "design")
    n = design.shape[0]
    return np.minimum(np.floor(design * n).astype(np.intp), n - 1)


def min_pairwise_distance(design: ArrayLike) -> float:
    """Smallest distance between two distinct rows (the maximin criterion)"""
    design = as_points(design, "design")
    if design.shape[0] < 2:
        return np.inf
    return float(np.min(pdist(design)))


def maximin_lhd(
    n: int, p: int, rng: SeededRng, iters: int = DEFAULT_MAXIMIN_ITERS
) -> FloatArray:
    """
    Maximin Latin hypercube design by best-of-``iters`` search

    Parameters
    ----------
    n : int
        Number of points, at least 2
    p : int
        Dimension
    rng : SeededRng
        Random stream
    iters : int
        Number of random LHDs drawn

    Returns
    -------
    ndarray
        The drawn LHD with the largest minimum pairwise distance. The first
        draw wins ties, so ``iters=1`` returns :func:`random_lhd`'s output.
    """
    _check_size(n, p, min_n=2)
    if iters < 1:
        raise UsageError(f"iters must be >= 1, got {iters}")
    sampler = qmc.LatinHypercube(d=p, seed=rng.generator)
    best = sampler.random(n)
    best_dist = min_pairwise_distance(best)
    for _ in range(iters - 1):
        candidate = sampler.random(n)
        cand_dist = min_pairwise_distance(candidate)
        if cand_dist > best_dist:
            best, best_dist = candidate, cand_dist
    logger.debug("maximin LHD n=%d p=%d min distance %.6g", n, p, best_dist)
    return best


def scrambled_sobol(n: int, p: int, rng: SeededRng) -> FloatArray:
    """
    Digitally scrambled Sobol points

    Parameters
    ----------
    n : int
        Number of points. Any positive number is accepted; powers of 2
        keep the balance properties of the sequence.
    p : int
        Dimension
    rng : SeededRng
        Random stream selecting the scrambling

    Returns
    -------
    ndarray
        Array with shape (n, p) in [0, 1)

    Notes
    -----
    Uses linear matrix scrambling followed by a digital shift.
    """
    _check_size(n, p)
    if p > qmc.Sobol.MAXDIM:
        raise UsageError(
            f"p={p} exceeds the Sobol direction-number table ({qmc.Sobol.MAXDIM})"
        )
    sampler = qmc.Sobol(d=p, scramble=True, seed=rng.generator)
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*balance properties.*")
        return sampler.random(n)


def uniform_cube(
    n: int,
    p: int,
    rng: SeededRng,
    lower: Optional[ArrayLike] = None,
    upper: Optional[ArrayLike] = None,
) -> FloatArray:
    """
    Independent uniform points in a box

    Parameters
    ----------
    n : int
        Number of points
    p : int
        Dimension
    rng : SeededRng
        Random stream
    lower, upper : array_like, optional
        Box corners. Default to the unit hypercube.

    Returns
    -------
    ndarray
        Array with shape (n, p)
    """
    _check_size(n, p)
    u = rng.generator.random((n, p))
    if lower is None and upper is None:
        return u
    lo = np.zeros(p) if lower is None else np.asarray(lower, dtype=float)
    hi = np.ones(p) if upper is None else np.asarray(upper, dtype=float)
    return lo + (hi - lo) * u


def uniform_ball(
    n: int,
    center: ArrayLike,
    radius: float,
    rng: SeededRng,
    basis: Optional[ArrayLike] = None,
) -> FloatArray:
    """
    Uniform points in a ball, optionally on an affine subspace

    Parameters
    ----------
    n : int
        Number of points
    center : array_like
        Ball center with ``dim`` coordinates
    radius : float
        Ball radius, non-negative
    rng : SeededRng
        Random stream
    basis : array_like, optional
        Orthonormal columns, shape (dim, d). When given the points are
        uniform in the d-ball of the subspace ``center + basis @ u``.

    Returns
    -------
    ndarray
        Array with shape (n, dim)

    Notes
    -----
    Directions are normalized Gaussian vectors and radii are
    ``radius * U ** (1 / d)``, which is exact in any dimension.
    """
    center = as_points(center, "center")[0]
    if radius < 0 or not np.isfinite(radius):
        raise UsageError(f"radius must be finite and non-negative, got {radius}")
    if int(n) != n or n < 0:
        raise UsageError(f"n must be a non-negative integer, got {n}")
    dim = center.shape[0]
    if basis is not None:
        basis = np.asarray(basis, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != dim or basis.shape[1] > dim:
            raise UsageError(
                f"basis must have shape ({dim}, d) with d <= {dim}, got {basis.shape}"
            )
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(basis.shape[1]))) > ORTHONORMAL_TOL:
            raise UsageError("basis columns are not orthonormal")
        d = basis.shape[1]
    else:
        d = dim
    gen = rng.generator
    directions = gen.standard_normal((n, d))
    norms = np.sqrt((directions * directions).sum(axis=1))
    norms[norms == 0] = 1.0
    radii = radius * gen.random(n) ** (1.0 / d)
    local = directions / norms[:, None] * radii[:, None]
    if basis is not None:
        return center + local @ basis.T
    return center + local
