"""
Euclidean geometry on finite point sets.

Points are rows of a 2-d float array. All nearest-neighbor queries are
exact and break ties toward the lowest index, so Voronoi membership and
every argmax built on top of it are reproducible.
"""
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from osfd.exceptions import UsageError
from osfd.typing import ArrayLike, FloatArray, IntArray

__all__ = [
    "NeighborList",
    "ScaleRecord",
    "as_points",
    "assign_to_nearest",
    "distance",
    "fill_distance",
    "knn_table",
    "nearest_distances",
    "nearest_neighbors",
    "pairwise_distances",
    "scale_to_unit_box",
]

# Upper bound on the number of float64 temporaries per distance block
_BLOCK_ELEMENTS = 2**22
# Tree candidates rechecked per query in nearest_distances
_SHORTLIST = 4


class NeighborList(NamedTuple):
    indices: IntArray
    distances: FloatArray


def as_points(points: ArrayLike, name: str = "points", dim: Optional[int] = None) -> FloatArray:
    """
    Validate and convert to a 2-d float array of points

    Parameters
    ----------
    points : array_like
        A single point (1-d) or a set of points (2-d, one point per row)
    name : str
        Argument name used in error messages
    dim : int, optional
        Required number of coordinates

    Returns
    -------
    ndarray
        Array with shape (npoints, dim)
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise UsageError(f"{name} must be a 1-d point or a 2-d array of points")
    if arr.shape[1] < 1:
        raise UsageError(f"{name} must have at least one coordinate")
    if dim is not None and arr.shape[1] != dim:
        raise UsageError(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} contains non-finite coordinates")
    return arr


def _row_norms(diff: FloatArray) -> FloatArray:
    return np.sqrt((diff * diff).sum(axis=-1))


def distance(a: ArrayLike, b: ArrayLike) -> float:
    """
    Euclidean distance between two points

    Parameters
    ----------
    a, b : array_like
        Points with the same number of coordinates

    Returns
    -------
    float
        ``||a - b||``
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise UsageError(f"dimension mismatch: {a.shape[0]} and {b.shape[0]}")
    return float(_row_norms(a - b))


def pairwise_distances(a: ArrayLike, b: ArrayLike) -> FloatArray:
    """
    Distance matrix between two point sets

    Parameters
    ----------
    a : array_like
        Points with shape (na, dim)
    b : array_like
        Points with shape (nb, dim)

    Returns
    -------
    ndarray
        Array with shape (na, nb) where entry (i, j) is ``||a[i] - b[j]||``

    Notes
    -----
    The coordinates are accumulated in index order, which makes the result
    identical to a scalar double loop.
    """
    a = as_points(a, "a")
    b = as_points(b, "b", dim=a.shape[1])
    out = np.empty((a.shape[0], b.shape[0]))
    step = max(1, _BLOCK_ELEMENTS // max(1, b.shape[0] * b.shape[1]))
    for start in range(0, a.shape[0], step):
        block = a[start : start + step]
        out[start : start + step] = _row_norms(block[:, None, :] - b[None, :, :])
    return out


def _sorted_neighbors(dist: FloatArray, k: int) -> IntArray:
    # stable sort keeps the lower index first among equal distances
    return np.argsort(dist, axis=-1, kind="stable")[..., :k]


def nearest_neighbors(
    query: ArrayLike, points: ArrayLike, k: int, self_index: Optional[int] = None
) -> NeighborList:
    """
    Exact k nearest neighbors of a single query

    Parameters
    ----------
    query : array_like
        Query point
    points : array_like
        Point set, shape (npoints, dim)
    k : int
        Number of neighbors
    self_index : int, optional
        Index of the query inside ``points``. When given, that entry is
        never returned.

    Returns
    -------
    NeighborList
        Indices and distances sorted by increasing distance, ties broken
        toward the lower index
    """
    points = as_points(points)
    query = as_points(query, "query", dim=points.shape[1])[0]
    if points.shape[0] == 0:
        raise UsageError("points must not be empty")
    if self_index is not None and not 0 <= self_index < points.shape[0]:
        raise UsageError(
            f"self_index must be between 0 and {points.shape[0] - 1}, got {self_index}"
        )
    available = points.shape[0] - (self_index is not None)
    if k < 1 or k > available:
        raise UsageError(f"k must be between 1 and {available}, got {k}")
    dist = _row_norms(points - query)
    if self_index is not None:
        dist[self_index] = np.inf
    idx = _sorted_neighbors(dist, k)
    return NeighborList(idx, dist[idx])


def knn_table(points: ArrayLike, k: int) -> NeighborList:
    """
    k nearest neighbors of every point within its own set

    Parameters
    ----------
    points : array_like
        Point set, shape (npoints, dim)
    k : int
        Number of neighbors, at most ``npoints - 1``

    Returns
    -------
    NeighborList
        ``indices`` and ``distances`` with shape (npoints, k). Row i never
        contains i.
    """
    points = as_points(points)
    m = points.shape[0]
    if k < 1 or k > m - 1:
        raise UsageError(f"k must be between 1 and {m - 1}, got {k}")
    dist = pairwise_distances(points, points)
    np.fill_diagonal(dist, np.inf)
    idx = _sorted_neighbors(dist, k)
    return NeighborList(idx, np.take_along_axis(dist, idx, axis=1))


def assign_to_nearest(points: ArrayLike, centers: ArrayLike) -> IntArray:
    """
    Index of the nearest center of each point

    Parameters
    ----------
    points : array_like
        Points to assign, shape (npoints, dim)
    centers : array_like
        Voronoi centers, shape (ncenters, dim)

    Returns
    -------
    ndarray
        Integer array of length npoints. Points on a Voronoi boundary go to
        the lowest-index center.
    """
    centers = as_points(centers, "centers")
    if centers.shape[0] == 0:
        raise UsageError("centers must not be empty")
    points = as_points(points, "points", dim=centers.shape[1])
    out = np.empty(points.shape[0], dtype=np.intp)
    step = max(1, _BLOCK_ELEMENTS // max(1, centers.shape[0] * centers.shape[1]))
    for start in range(0, points.shape[0], step):
        block = points[start : start + step]
        dist = _row_norms(block[:, None, :] - centers[None, :, :])
        out[start : start + step] = np.argmin(dist, axis=1)
    return out


def nearest_distances(points: ArrayLike, centers: ArrayLike) -> FloatArray:
    """
    Distance from each point to its nearest center

    Parameters
    ----------
    points : array_like
        Query points, shape (npoints, dim)
    centers : array_like
        Centers, shape (ncenters, dim)

    Returns
    -------
    ndarray
        Float array of length npoints
    """
    centers = as_points(centers, "centers")
    if centers.shape[0] == 0:
        raise UsageError("centers must not be empty")
    points = as_points(points, "points", dim=centers.shape[1])
    if points.shape[0] == 0:
        return np.empty(0)
    # The tree only shortlists centers; distances are recomputed with the
    # same arithmetic as pairwise_distances so near-ties resolve exactly.
    k = min(_SHORTLIST, centers.shape[0])
    _, idx = cKDTree(centers).query(points, k=k)
    idx = idx.reshape(points.shape[0], k)
    dist = _row_norms(points[:, None, :] - centers[idx])
    return dist.min(axis=1)


def fill_distance(reference: ArrayLike, outputs: ArrayLike) -> float:
    """
    Empirical fill distance of a point set

    Parameters
    ----------
    reference : array_like
        Dense set standing in for the region to be covered
    outputs : array_like
        Design points

    Returns
    -------
    float
        ``max_r min_y ||r - y||``
    """
    reference = as_points(reference, "reference")
    if reference.shape[0] == 0:
        raise UsageError("reference must not be empty")
    return float(np.max(nearest_distances(reference, outputs)))


class ScaleRecord(NamedTuple):
    """
    Per-dimension affine map onto the unit box

    Attributes
    ----------
    lower : ndarray
        Per-dimension minimum
    upper : ndarray
        Per-dimension maximum
    """

    lower: FloatArray
    upper: FloatArray

    @property
    def degenerate(self) -> np.ndarray:
        """Dimensions with zero range"""
        return self.upper == self.lower

    def apply(self, points: ArrayLike) -> FloatArray:
        """Map points onto the unit box. Zero-range dimensions map to 0.5."""
        points = as_points(points, dim=self.lower.shape[0])
        span = np.where(self.degenerate, 1.0, self.upper - self.lower)
        scaled = (points - self.lower) / span
        scaled[:, self.degenerate] = 0.5
        return scaled

    def invert(self, scaled: ArrayLike) -> FloatArray:
        """Undo :meth:`apply`. Zero-range dimensions return the constant."""
        scaled = as_points(scaled, dim=self.lower.shape[0])
        return self.lower + scaled * (self.upper - self.lower)

    def to_dict(self) -> dict:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}


def scale_to_unit_box(points: ArrayLike) -> Tuple[FloatArray, ScaleRecord]:
    """
    Scale each dimension to [0, 1] by its minimum and maximum

    Parameters
    ----------
    points : array_like
        At least two points, shape (npoints, dim)

    Returns
    -------
    scaled : ndarray
        Scaled points
    record : ScaleRecord
        The map, for inversion
    """
    points = as_points(points)
    if points.shape[0] < 2:
        raise UsageError("scale_to_unit_box requires at least 2 points")
    record = ScaleRecord(points.min(axis=0), points.max(axis=0))
    return record.apply(points), record
