"""
Local fill distances and the largest gap in the output space.
"""
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, Tuple

import numpy as np

from osfd.approx import ApproxSet
from osfd.exceptions import UsageError
from osfd.geometry import as_points, assign_to_nearest
from osfd.typing import ArrayLike, FloatArray

if TYPE_CHECKING:
    from osfd.engine import Design

__all__ = ["FillRecord", "gap_point", "local_fill_distances"]


@dataclass(frozen=True)
class FillRecord:
    """
    Approximate local fill distances of a design's outputs

    Attributes
    ----------
    d : ndarray
        Local fill distance of each output
    i_star : int
        Index of the largest local fill distance, lowest index on ties
    global_fill : float
        ``d[i_star]``, the estimated fill distance of the outputs
    """

    d: FloatArray
    i_star: int
    global_fill: float

    @classmethod
    def from_distances(cls, d: ArrayLike) -> "FillRecord":
        d = np.asarray(d, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise UsageError("local fill distances must be a non-empty 1-d array")
        i_star = int(np.argmax(d))
        return cls(d, i_star, float(d[i_star]))

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d.tolist(), "i_star": self.i_star, "global": self.global_fill}

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "FillRecord":
        return cls.from_distances(values["d"])


def local_fill_distances(outputs: ArrayLike, approx: ApproxSet) -> FillRecord:
    """
    Local fill distance of each output over an approximating set

    Parameters
    ----------
    outputs : array_like
        Design outputs, shape (m, q)
    approx : ApproxSet
        Approximating set with points of dimension q

    Returns
    -------
    FillRecord
        ``d[i]`` is the largest distance from output i to an approximating
        point in its Voronoi cell, 0 if the cell holds none.
    """
    outputs = as_points(outputs, "outputs")
    if outputs.shape[0] == 0:
        raise UsageError("outputs must not be empty")
    points = approx.points if isinstance(approx, ApproxSet) else approx
    points = as_points(points, "approx", dim=outputs.shape[1])
    if points.shape[0] == 0:
        raise UsageError("approximating set must not be empty")
    owner = assign_to_nearest(points, outputs)
    diff = points - outputs[owner]
    dist = np.sqrt((diff * diff).sum(axis=1))
    d = np.zeros(outputs.shape[0])
    np.maximum.at(d, owner, dist)
    return FillRecord.from_distances(d)


def gap_point(record: FillRecord, design: "Design") -> Tuple[FloatArray, FloatArray]:
    """
    Input/output pair with the largest local fill distance

    Parameters
    ----------
    record : FillRecord
        Record built from the design's outputs
    design : Design
        The design

    Returns
    -------
    x_star, y_star : ndarray
        Input and raw output of run ``record.i_star``
    """
    if not 0 <= record.i_star < len(design):
        raise IndexError(
            f"i_star={record.i_star} does not index a design of size {len(design)}"
        )
    return design.inputs[record.i_star], design.outputs[record.i_star]
