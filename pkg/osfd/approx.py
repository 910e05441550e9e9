"""
Approximating point sets for an unknown output region.

Given the outputs of a design, :func:`approx_gen` builds a finite set that
stands in for the image of the input hypercube. It is the union of three
parts, each tagged:

* ``A1`` -- centroid and axial points of the simplex spanned by each output
  and its ``min(p, q)`` nearest neighbors,
* ``A2`` -- midpoints between each output and its ``k1`` nearest neighbors,
* ``A3`` -- uniform points in a ball around each output whose radius is
  the distance to its nearest neighbor. When ``p < q`` the outputs lie on a
  p-dimensional manifold and the ball is drawn in the local tangent plane.
"""
from dataclasses import dataclass
import logging
from typing import List, Optional

import numpy as np

from osfd.exceptions import UsageError
from osfd.geometry import as_points, knn_table
from osfd.rng import SeededRng
from osfd.sampling import uniform_ball
from osfd.typing import ArrayLike, FloatArray

__all__ = [
    "ApproxSet",
    "TangentBasis",
    "approx_gen",
    "axial_points",
    "default_k1",
    "simplex_centroid",
    "tangent_basis",
]

logger = logging.getLogger(__name__)

RANK_TOL = 1e-12
TAGS = ("A1", "A2", "A3")


@dataclass(frozen=True)
class ApproxSet:
    """
    Tagged approximating point set

    Attributes
    ----------
    points : ndarray
        Points with shape (npoints, q), free of exact duplicates
    tags : ndarray
        Provenance of each point, one of ``"A1"``, ``"A2"``, ``"A3"``
    """

    points: FloatArray
    tags: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]

    def part(self, tag: str) -> FloatArray:
        """Points carrying ``tag``"""
        if tag not in TAGS:
            raise UsageError(f"tag must be one of {TAGS}, got {tag!r}")
        return self.points[self.tags == tag]


@dataclass(frozen=True)
class TangentBasis:
    """
    Orthonormal directions of a local tangent plane

    Attributes
    ----------
    origin : ndarray
        Point the plane is attached to
    directions : ndarray
        Orthonormal columns, shape (q, d)
    degenerate : bool
        True if the neighborhood did not span d dimensions and the basis was
        completed with arbitrary orthonormal directions
    """

    origin: FloatArray
    directions: FloatArray
    degenerate: bool = False


def _vertex_array(vertices: ArrayLike, order: Optional[int]) -> FloatArray:
    vertices = as_points(vertices, "vertices")
    if order is not None and vertices.shape[0] != order + 1:
        raise UsageError(
            f"a simplex of order {order} needs {order + 1} vertices, "
            f"got {vertices.shape[0]}"
        )
    return vertices


def simplex_centroid(vertices: ArrayLike, order: Optional[int] = None) -> FloatArray:
    """
    Centroid of a simplex

    Parameters
    ----------
    vertices : array_like
        Vertices with shape (k + 1, q)
    order : int, optional
        Expected k. If given, the vertex count is checked.

    Returns
    -------
    ndarray
        Mean of the vertices
    """
    return _vertex_array(vertices, order).mean(axis=0)


def axial_points(vertices: ArrayLike, order: Optional[int] = None) -> FloatArray:
    """
    Axial points on the extended medians of a simplex

    Parameters
    ----------
    vertices : array_like
        Vertices ``y_0, ..., y_k`` with shape (k + 1, q), k >= 1
    order : int, optional
        Expected k. If given, the vertex count is checked.

    Returns
    -------
    ndarray
        Array with shape (k + 1, q) whose row j is
        ``(1.5 / k) * sum_{l != j} y_l - 0.5 * y_j``, that is
        ``c + (0.5 + 1.5 / k) * (c - y_j)`` with ``c`` the centroid.
    """
    vertices = _vertex_array(vertices, order)
    k = vertices.shape[0] - 1
    if k < 1:
        raise UsageError("axial points need at least 2 vertices")
    centroid = vertices.mean(axis=0)
    return centroid + (0.5 + 1.5 / k) * (centroid - vertices)


def _positive_first(directions: FloatArray) -> FloatArray:
    # fixed sign: the first non-negligible component of each column is positive
    out = directions.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nonzero = np.flatnonzero(np.abs(col) > RANK_TOL)
        if nonzero.size and col[nonzero[0]] < 0:
            out[:, j] = -col
    return out


def tangent_basis(y: ArrayLike, neighbors: ArrayLike, dim: Optional[int] = None) -> TangentBasis:
    """
    Tangent plane at an output from principal components of its neighborhood

    Parameters
    ----------
    y : array_like
        Output point with q coordinates
    neighbors : array_like
        Its nearest neighbors, shape (d, q)
    dim : int, optional
        Intrinsic dimension d. Defaults to the number of neighbors.

    Returns
    -------
    TangentBasis
        The d leading principal directions of ``{y} U neighbors``, centered
        at their mean. Rank-deficient neighborhoods are completed with
        orthonormal directions and flagged as degenerate.
    """
    y = as_points(y, "y")[0]
    q = y.shape[0]
    neighbors = as_points(neighbors, "neighbors", dim=q)
    d = neighbors.shape[0] if dim is None else dim
    if d < 1 or d >= q:
        raise UsageError(f"tangent dimension must be in [1, {q - 1}], got {d}")
    if neighbors.shape[0] != d:
        raise UsageError(f"expected {d} neighbors, got {neighbors.shape[0]}")
    cloud = np.vstack([y, neighbors])
    centered = cloud - cloud.mean(axis=0)
    _, sing, vt = np.linalg.svd(centered, full_matrices=False)
    scale = sing[0] if sing.size else 0.0
    rank = int(np.sum(sing[:d] > RANK_TOL * scale)) if scale > 0 else 0
    good = vt[:rank].T
    degenerate = rank < d
    if degenerate:
        # orthonormal completion of the well-determined directions
        q_mat, _ = np.linalg.qr(np.column_stack([good, np.eye(q)]))
        directions = np.column_stack([good, q_mat[:, rank:d]])
        logger.debug("degenerate tangent plane: rank %d < %d", rank, d)
    else:
        directions = good
    return TangentBasis(y, _positive_first(directions), degenerate)


def default_k1(p: int, q: int) -> int:
    """Default number of neighbors used for midpoints, ``2 * min(p, q)``"""
    return 2 * min(p, q)


def approx_gen(
    outputs: ArrayLike,
    p: int,
    q: int,
    rng: SeededRng,
    k1: Optional[int] = None,
) -> ApproxSet:
    """
    Approximating point set of the output region

    Parameters
    ----------
    outputs : array_like
        Design outputs with shape (m, q), usually scaled to the unit box
    p : int
        Input dimension
    q : int
        Output dimension
    rng : SeededRng
        Random stream for the ball samples
    k1 : int, optional
        Number of neighbors used for midpoints. Defaults to
        ``2 * min(p, q)``. Clamped to ``m - 1``.

    Returns
    -------
    ApproxSet
        Union of the A1, A2 and A3 parts with exact duplicates removed,
        built in output-index order

    Notes
    -----
    Outputs whose nearest neighbor coincides with them get no ball. A ball
    of radius zero contributes only copies of the output itself.
    """
    outputs = as_points(outputs, "outputs", dim=q)
    m = outputs.shape[0]
    k = min(p, q)
    if m < k + 1:
        raise UsageError(
            f"approx_gen needs at least {k + 1} outputs for p={p}, q={q}; got {m}"
        )
    k1 = default_k1(p, q) if k1 is None else k1
    if k1 < 1:
        raise UsageError(f"k1 must be positive, got {k1}")
    k1 = min(k1, m - 1)
    table = knn_table(outputs, max(k, k1))
    nbr_idx, nbr_dist = table.indices, table.distances
    ball_dim = q if p >= q else p
    ball_size = k1 + 2 * (ball_dim + 1) + 1

    points: List[FloatArray] = []
    tags: List[str] = []

    def _add(block: FloatArray, tag: str) -> None:
        points.append(block)
        tags.extend([tag] * block.shape[0])

    for i in range(m):
        y = outputs[i]
        simplex = np.vstack([y, outputs[nbr_idx[i, :k]]])
        _add(simplex.mean(axis=0)[None, :], "A1")
        _add(axial_points(simplex), "A1")
        _add(0.5 * (y + outputs[nbr_idx[i, :k1]]), "A2")
        radius = nbr_dist[i, 0]
        if radius == 0:
            continue
        if p >= q:
            _add(uniform_ball(ball_size, y, radius, rng), "A3")
        else:
            basis = tangent_basis(y, outputs[nbr_idx[i, :p]])
            _add(uniform_ball(ball_size, y, radius, rng, basis=basis.directions), "A3")

    stacked = np.vstack(points)
    tag_arr = np.asarray(tags)
    _, first = np.unique(stacked, axis=0, return_index=True)
    keep = np.sort(first)
    logger.debug("approximating set: %d points (%d before dedup)", keep.size, len(tags))
    return ApproxSet(stacked[keep], tag_arr[keep])
