from typing import Literal, Sequence, Union

import numpy as np
from numpy.random import SeedSequence

__all__ = [
    "ArrayLike",
    "FloatArray",
    "InitMethod",
    "IntArray",
    "Method",
    "SeedLike",
]

Method = Literal["greedy", "ei"]
InitMethod = Literal["random_lhd", "maximin_lhd"]

SeedLike = Union[None, int, Sequence[int], SeedSequence]

ArrayLike = Union[np.ndarray, Sequence[float], Sequence[Sequence[float]]]
FloatArray = np.ndarray
IntArray = np.ndarray
