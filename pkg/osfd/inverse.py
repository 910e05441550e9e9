"""
Inverse design by lookup in a design's outputs.

A design whose outputs fill the output space doubles as a lookup table:
for a target output, the run with the nearest output gives an input that
approximately achieves it, and the distance to that output measures how
well the target is met.
"""
from typing import Dict, NamedTuple

import numpy as np

from osfd.engine import Design
from osfd.exceptions import UsageError
from osfd.geometry import as_points, assign_to_nearest
from osfd.typing import ArrayLike, FloatArray, IntArray

__all__ = ["Lookup", "delta_summary", "inverse_lookup"]


class Lookup(NamedTuple):
    index: IntArray
    inputs: FloatArray
    outputs: FloatArray
    delta: FloatArray


def inverse_lookup(design: Design, targets: ArrayLike) -> Lookup:
    """
    Nearest design run of every target output

    Parameters
    ----------
    design : Design
        Non-empty design
    targets : array_like
        Target outputs, shape (ntargets, q)

    Returns
    -------
    Lookup
        Index, input and output of the chosen run for each target and the
        distance ``delta`` between the target and that output, in raw
        output units
    """
    if len(design) == 0:
        raise UsageError("the design is empty")
    targets = as_points(targets, "targets", dim=design.q)
    index = assign_to_nearest(targets, design.outputs)
    outputs = design.outputs[index]
    diff = targets - outputs
    delta = np.sqrt((diff * diff).sum(axis=1))
    return Lookup(index, design.inputs[index], outputs, delta)


def delta_summary(delta: ArrayLike) -> Dict[str, float]:
    """Median, mean, 5% and 95% quantiles and maximum of the lookup errors"""
    delta = np.asarray(delta, dtype=float)
    if delta.size == 0:
        raise UsageError("delta is empty")
    return {
        "median": float(np.median(delta)),
        "mean": float(np.mean(delta)),
        "q05": float(np.quantile(delta, 0.05)),
        "q95": float(np.quantile(delta, 0.95)),
        "max": float(np.max(delta)),
    }
