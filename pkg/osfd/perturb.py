"""
Proposal of the next input point.

Two rules move away from the input ``x_{i*}`` whose output has the largest
local fill distance:

* greedy -- the candidate of the Voronoi cell of ``x_{i*}`` that lies
  furthest from it,
* ei -- the candidate maximizing the expected improvement of a
  nearest-neighbor model of the local fill distance, whose variance grows
  linearly with the distance to the nearest design input.

Candidate sets are clipped to the unit hypercube and purged of exact
duplicates and of points already in the design.
"""
from dataclasses import dataclass
import logging
from typing import List, Optional, Union

import numpy as np
from scipy.stats import norm

from osfd.exceptions import UsageError
from osfd.filldist import FillRecord
from osfd.geometry import (
    NeighborList,
    as_points,
    assign_to_nearest,
    knn_table,
    nearest_neighbors,
)
from osfd.rng import SeededRng
from osfd.sampling import scrambled_sobol, uniform_ball, uniform_cube
from osfd.typing import ArrayLike, FloatArray, Method

__all__ = [
    "CandidateSet",
    "EiModel",
    "Proposal",
    "default_k2",
    "ei_candidates",
    "ei_perturbation",
    "estimate_sigma2",
    "expected_improvement",
    "fit_ei_model",
    "greedy_candidates",
    "greedy_perturbation",
    "propose",
    "select_ei",
    "select_greedy",
]

logger = logging.getLogger(__name__)

RULE_GREEDY = "greedy"
RULE_EI = "ei"
# greedy move used because the EI model has zero variance
RULE_EI_FALLBACK = "greedy-fallback"
# no candidate fell in the Voronoi cell of x_{i*}
RULE_CELL_EMPTY = "greedy-cell-empty"

SOURCES = ("sobol-box", "ball", "midpoint", "uniform")


@dataclass(frozen=True)
class CandidateSet:
    """
    Candidate inputs with their construction source

    Attributes
    ----------
    points : ndarray
        Candidates with shape (ncandidates, p) inside the unit hypercube
    sources : ndarray
        One of ``"sobol-box"``, ``"ball"``, ``"midpoint"``, ``"uniform"``
    """

    points: FloatArray
    sources: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def build(
        cls, blocks: List[FloatArray], sources: List[str], inputs: FloatArray
    ) -> "CandidateSet":
        """
        Clip, deduplicate and drop existing inputs, keeping first occurrences

        Parameters
        ----------
        blocks : list[ndarray]
            Candidate blocks in construction order
        sources : list[str]
            Source tag of each block
        inputs : ndarray
            Current design inputs

        Returns
        -------
        CandidateSet
            Cleaned candidates in construction order
        """
        p = inputs.shape[1]
        points = np.clip(np.vstack([b.reshape(-1, p) for b in blocks]), 0.0, 1.0)
        tags = np.concatenate(
            [np.full(b.reshape(-1, p).shape[0], s, dtype=object) for b, s in zip(blocks, sources)]
        )
        _, first = np.unique(points, axis=0, return_index=True)
        keep = np.zeros(points.shape[0], dtype=bool)
        keep[first] = True
        existing = {tuple(row) for row in inputs.tolist()}
        keep &= np.array([tuple(row) not in existing for row in points.tolist()], dtype=bool)
        return cls(points[keep], tags[keep].astype(str))


@dataclass(frozen=True)
class EiModel:
    """
    Nearest-neighbor model of the local fill distance

    Attributes
    ----------
    sigma2 : float
        Variance scale; the predictive variance at x is
        ``sigma2 * ||x - x_i||`` with x_i the nearest design input
    h : ndarray
        Local fill distance of each design input
    h_max : float
        ``max(h)``
    """

    sigma2: float
    h: FloatArray
    h_max: float


@dataclass(frozen=True)
class Proposal:
    """Proposed input and the rule that produced it"""

    x: FloatArray
    rule: str


def default_k2(p: int) -> int:
    """Default number of input neighbors, ``2 * p``"""
    return 2 * p


def _design_inputs(inputs: ArrayLike, min_size: int = 2) -> FloatArray:
    inputs = as_points(inputs, "inputs")
    if inputs.shape[0] < min_size:
        raise UsageError(
            f"perturbation needs at least {min_size} design inputs, got {inputs.shape[0]}"
        )
    return inputs


def _neighbors_of_star(inputs: FloatArray, i_star: int, k2: Optional[int]) -> NeighborList:
    m, p = inputs.shape
    if not 0 <= i_star < m:
        raise IndexError(f"i_star={i_star} does not index {m} inputs")
    k2 = default_k2(p) if k2 is None else k2
    if k2 < 1:
        raise UsageError(f"k2 must be positive, got {k2}")
    return nearest_neighbors(inputs[i_star], inputs, min(k2, m - 1), self_index=i_star)


def _ensure_nonempty(
    candidates: CandidateSet, inputs: FloatArray, rng: SeededRng
) -> CandidateSet:
    while len(candidates) == 0:
        p = inputs.shape[1]
        logger.info("candidate set empty after filtering, drawing uniform candidates")
        candidates = CandidateSet.build([uniform_cube(10 * p, p, rng)], ["uniform"], inputs)
    return candidates


def greedy_candidates(
    inputs: ArrayLike, i_star: int, rng: SeededRng, k2: Optional[int] = None
) -> CandidateSet:
    """
    Local candidate set around ``x_{i*}``

    Parameters
    ----------
    inputs : array_like
        Design inputs, shape (m, p), m >= 2
    i_star : int
        Index of the input to perturb
    rng : SeededRng
        Random stream
    k2 : int, optional
        Number of input neighbors. Defaults to ``2 * p``, clamped to ``m - 1``.

    Returns
    -------
    CandidateSet
        ``10 p (k2 + 1)`` scrambled Sobol points in the box of half-width
        ``d(x_{i*}, x_{i*}^{(k2)})`` around ``x_{i*}`` (cut to the unit
        cube), ``10 p`` ball points around each neighbor ``x^{(j)}`` with
        radius ``d(x_{i*}, x^{(j)})``, and ``10 p`` ball points around
        ``x_{i*}`` with radius ``d(x_{i*}, x^{(1)})``
    """
    inputs = _design_inputs(inputs)
    p = inputs.shape[1]
    nbrs = _neighbors_of_star(inputs, i_star, k2)
    k2 = nbrs.indices.shape[0]
    x_star = inputs[i_star]
    half_width = nbrs.distances[-1]
    lower = np.maximum(0.0, x_star - half_width)
    upper = np.minimum(1.0, x_star + half_width)
    box = lower + (upper - lower) * scrambled_sobol(10 * p * (k2 + 1), p, rng)
    blocks = [box]
    sources = ["sobol-box"]
    for j in range(k2):
        center = inputs[nbrs.indices[j]]
        blocks.append(uniform_ball(10 * p, center, nbrs.distances[j], rng))
        sources.append("ball")
    blocks.append(uniform_ball(10 * p, x_star, nbrs.distances[0], rng))
    sources.append("ball")
    return CandidateSet.build(blocks, sources, inputs)


def select_greedy(inputs: ArrayLike, i_star: int, candidates: CandidateSet) -> Proposal:
    """
    Furthest candidate from ``x_{i*}`` inside its Voronoi cell

    Parameters
    ----------
    inputs : array_like
        Design inputs, shape (m, p)
    i_star : int
        Index of the input to perturb
    candidates : CandidateSet
        Non-empty candidate set

    Returns
    -------
    Proposal
        The selected candidate. If no candidate falls in the cell of
        ``x_{i*}``, the candidate furthest from its own nearest input is
        returned instead with rule ``"greedy-cell-empty"``.
    """
    inputs = as_points(inputs, "inputs")
    points = as_points(candidates.points, "candidates", dim=inputs.shape[1])
    if points.shape[0] == 0:
        raise UsageError("candidate set is empty")
    owner = assign_to_nearest(points, inputs)
    diff = points - inputs[owner]
    dist = np.sqrt((diff * diff).sum(axis=1))
    in_cell = np.flatnonzero(owner == i_star)
    if in_cell.size:
        return Proposal(points[in_cell[np.argmax(dist[in_cell])]].copy(), RULE_GREEDY)
    logger.info("no candidate in the Voronoi cell of input %d, using most isolated", i_star)
    return Proposal(points[np.argmax(dist)].copy(), RULE_CELL_EMPTY)


def greedy_perturbation(
    inputs: ArrayLike, i_star: int, rng: SeededRng, k2: Optional[int] = None
) -> FloatArray:
    """
    Greedy perturbation of ``x_{i*}``

    Parameters
    ----------
    inputs : array_like
        Design inputs, shape (m, p), m >= 2
    i_star : int
        Index of the input to perturb
    rng : SeededRng
        Random stream
    k2 : int, optional
        Number of input neighbors. Defaults to ``2 * p``.

    Returns
    -------
    ndarray
        Next input point in the unit hypercube
    """
    return _greedy(as_points(inputs, "inputs"), i_star, rng, k2).x


def _greedy(inputs: FloatArray, i_star: int, rng: SeededRng, k2: Optional[int]) -> Proposal:
    candidates = _ensure_nonempty(greedy_candidates(inputs, i_star, rng, k2), inputs, rng)
    return select_greedy(inputs, i_star, candidates)


def estimate_sigma2(inputs: ArrayLike, h: ArrayLike) -> float:
    """
    Leave-one-out estimate of the variance scale

    Parameters
    ----------
    inputs : array_like
        Design inputs, shape (m, p), m >= 2
    h : array_like
        Local fill distance of each input

    Returns
    -------
    float
        Mean over i of ``(h_i - h_{nn(i)})**2 / ||x_i - x_{nn(i)}||`` where
        nn(i) is the nearest other input. Terms with a zero denominator are
        skipped; 0.0 if all are.
    """
    inputs = _design_inputs(inputs)
    h = np.asarray(h, dtype=float)
    if h.shape != (inputs.shape[0],):
        raise UsageError(f"h must have length {inputs.shape[0]}, got shape {h.shape}")
    table = knn_table(inputs, 1)
    nn = table.indices[:, 0]
    dist = table.distances[:, 0]
    valid = dist > 0
    if not np.any(valid):
        return 0.0
    terms = (h[valid] - h[nn[valid]]) ** 2 / dist[valid]
    return float(np.mean(terms))


def fit_ei_model(inputs: ArrayLike, h: ArrayLike) -> EiModel:
    """Fit the nearest-neighbor model to local fill distances ``h``"""
    h = np.asarray(h, dtype=float)
    return EiModel(estimate_sigma2(inputs, h), h, float(np.max(h)))


def expected_improvement(
    x: ArrayLike, inputs: ArrayLike, model: EiModel
) -> Union[float, FloatArray]:
    """
    Expected improvement of the local fill distance

    Parameters
    ----------
    x : array_like
        A point (1-d) or points (2-d) in the input space
    inputs : array_like
        Design inputs the model was fit on
    model : EiModel
        Fitted model

    Returns
    -------
    {float, ndarray}
        ``s * (u * Phi(u) + phi(u))`` with ``s = sqrt(sigma2 * ||x - x_i||)``
        and ``u = (h_i - h_max) / s`` where ``x_i`` is the nearest input.
        Zero where ``s`` is zero, including everywhere when ``sigma2 == 0``.
    """
    single = np.ndim(x) == 1
    inputs = as_points(inputs, "inputs")
    points = as_points(x, "x", dim=inputs.shape[1])
    owner = assign_to_nearest(points, inputs)
    diff = points - inputs[owner]
    s = np.sqrt(model.sigma2 * np.sqrt((diff * diff).sum(axis=1)))
    ei = np.zeros(points.shape[0])
    positive = s > 0
    u = (model.h[owner[positive]] - model.h_max) / s[positive]
    ei[positive] = np.maximum(s[positive] * (u * norm.cdf(u) + norm.pdf(u)), 0.0)
    return float(ei[0]) if single else ei


def ei_candidates(
    inputs: ArrayLike, i_star: int, rng: SeededRng, k2: Optional[int] = None
) -> CandidateSet:
    """
    Global candidate set for the EI rule

    Parameters
    ----------
    inputs : array_like
        Design inputs, shape (m, p), m >= 2
    i_star : int
        Index of the input with the largest local fill distance
    rng : SeededRng
        Random stream
    k2 : int, optional
        Number of input neighbors. Defaults to ``2 * p``.

    Returns
    -------
    CandidateSet
        ``10 m`` uniform points in the unit cube; for each j <= k2, ``10 p``
        ball points around the j-th neighbor of ``x_{i*}`` (radius its
        distance to ``x_{i*}``) and the midpoints between every input and its
        j-th nearest input; ``10 p`` ball points around ``x_{i*}``
    """
    inputs = _design_inputs(inputs)
    m, p = inputs.shape
    nbrs = _neighbors_of_star(inputs, i_star, k2)
    k2 = nbrs.indices.shape[0]
    table = knn_table(inputs, k2)
    blocks = [uniform_cube(10 * m, p, rng)]
    sources = ["uniform"]
    for j in range(k2):
        center = inputs[nbrs.indices[j]]
        blocks.append(uniform_ball(10 * p, center, nbrs.distances[j], rng))
        sources.append("ball")
        blocks.append(0.5 * (inputs + inputs[table.indices[:, j]]))
        sources.append("midpoint")
    blocks.append(uniform_ball(10 * p, inputs[i_star], nbrs.distances[0], rng))
    sources.append("ball")
    return CandidateSet.build(blocks, sources, inputs)


def select_ei(inputs: ArrayLike, model: EiModel, candidates: CandidateSet) -> FloatArray:
    """Candidate with the largest expected improvement, first one on ties"""
    points = candidates.points
    if points.shape[0] == 0:
        raise UsageError("candidate set is empty")
    ei = expected_improvement(points, inputs, model)
    return points[int(np.argmax(ei))].copy()


def ei_perturbation(
    inputs: ArrayLike, record: FillRecord, rng: SeededRng, k2: Optional[int] = None
) -> FloatArray:
    """
    Expected-improvement perturbation

    Parameters
    ----------
    inputs : array_like
        Design inputs, shape (m, p), m >= 2
    record : FillRecord
        Local fill distances of the design outputs
    rng : SeededRng
        Random stream
    k2 : int, optional
        Number of input neighbors. Defaults to ``2 * p``.

    Returns
    -------
    ndarray
        Next input point. When the fitted variance scale is zero the EI
        surface is flat and the greedy rule is used instead.
    """
    return propose(inputs, record, rng, "ei", k2).x


def propose(
    inputs: ArrayLike,
    record: FillRecord,
    rng: SeededRng,
    method: Method,
    k2: Optional[int] = None,
) -> Proposal:
    """
    Next input point under the chosen rule

    Parameters
    ----------
    inputs : array_like
        Design inputs, shape (m, p), m >= 2
    record : FillRecord
        Local fill distances of the design outputs
    rng : SeededRng
        Random stream
    method : {"greedy", "ei"}
        Perturbation rule
    k2 : int, optional
        Number of input neighbors. Defaults to ``2 * p``.

    Returns
    -------
    Proposal
        Proposed point and the rule actually used
    """
    inputs = _design_inputs(inputs)
    if record.d.shape[0] != inputs.shape[0]:
        raise UsageError("fill record does not match the design size")
    if method == "greedy":
        return _greedy(inputs, record.i_star, rng, k2)
    if method != "ei":
        raise UsageError(f"method must be 'greedy' or 'ei', got {method!r}")
    model = fit_ei_model(inputs, record.d)
    if model.sigma2 <= 0:
        logger.info("EI variance scale is zero, falling back to the greedy rule")
        greedy = _greedy(inputs, record.i_star, rng, k2)
        return Proposal(greedy.x, RULE_EI_FALLBACK)
    candidates = _ensure_nonempty(ei_candidates(inputs, record.i_star, rng, k2), inputs, rng)
    return Proposal(select_ei(inputs, model, candidates), RULE_EI)
