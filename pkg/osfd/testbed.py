"""
Analytic test problems on the unit hypercube.

Every function accepts a single input (1-d) or a batch of inputs (2-d, one
per row) and returns outputs of the same layout. Problems are addressable
by a name and parameter string such as ``"inverse_radius:eps=0.1"``,
``"exponential:alpha=100"``, ``"easom:p=8"`` or ``"robot_arm"``.
"""
from dataclasses import dataclass, field
import math
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from osfd.evaluators import FunctionEvaluator
from osfd.exceptions import UsageError
from osfd.rng import SeededRng
from osfd.sampling import scrambled_sobol, uniform_ball
from osfd.typing import ArrayLike, FloatArray

__all__ = [
    "PROBLEMS",
    "Problem",
    "easom",
    "exponential",
    "get_problem",
    "inverse_radius",
    "parse_problem",
    "robot_arm",
]

ROBOT_ARM_TARGETS = 100_030
ROBOT_ARM_REACH = 4.0


def _batch(x: ArrayLike, p: Optional[int] = None) -> Tuple[FloatArray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or (p is not None and arr.shape[1] != p):
        expected = "p" if p is None else str(p)
        raise UsageError(f"inputs must have {expected} coordinates, got shape {arr.shape}")
    return arr, single


def _unbatch(out: FloatArray, single: bool) -> FloatArray:
    return out[0] if single else out


def inverse_radius(x: ArrayLike, eps: float = 0.1) -> FloatArray:
    """
    Inverse radius and polar angle

    Parameters
    ----------
    x : array_like
        Point(s) in [0, 1]^2
    eps : float
        Positive offset keeping the radius term finite at the origin

    Returns
    -------
    ndarray
        ``(1 / sqrt(x1**2 + x2**2 + eps**2), angle)`` where ``angle`` is
        ``arctan(x2 / x1)`` extended to ``x1 = 0`` by the two-argument angle
        and set to 0 at the origin
    """
    if not eps > 0:
        raise UsageError(f"eps must be positive, got {eps}")
    arr, single = _batch(x, 2)
    x1, x2 = arr[:, 0], arr[:, 1]
    radius = 1.0 / np.sqrt(x1 * x1 + x2 * x2 + eps * eps)
    angle = np.arctan2(x2, x1)
    return _unbatch(np.column_stack([radius, angle]), single)


def exponential(x: ArrayLike, alpha: float = 10.0) -> FloatArray:
    """
    Sums of exponentials with rates alpha, 2 alpha and 4 alpha

    Parameters
    ----------
    x : array_like
        Point(s) in [0, 1]^2
    alpha : float
        Rate. Large values concentrate the output variation near the origin.

    Returns
    -------
    ndarray
        ``(e1(x1) + e1(x2), e2(x1) + e2(x2), e4(x1) + e4(x2))`` with
        ``ek(t) = exp(-k alpha t)``
    """
    arr, single = _batch(x, 2)
    cols = [np.exp(-k * alpha * arr[:, 0]) + np.exp(-k * alpha * arr[:, 1]) for k in (1, 2, 4)]
    return _unbatch(np.column_stack(cols), single)


def easom(x: ArrayLike) -> FloatArray:
    """
    Modified Easom function

    Parameters
    ----------
    x : array_like
        Point(s) in [0, 1]^p

    Returns
    -------
    ndarray
        One output, ``prod_i cos(2 pi x_i) exp(-pi**2 (2 x_i - 1)**2 / p)``
    """
    arr, single = _batch(x)
    p = arr.shape[1]
    terms = np.cos(2 * np.pi * arr) * np.exp(-(np.pi**2) * (2 * arr - 1) ** 2 / p)
    return _unbatch(np.prod(terms, axis=1)[:, None], single)


def robot_arm(u: ArrayLike) -> FloatArray:
    """
    Position of the tip of a planar arm with four extendable segments

    Parameters
    ----------
    u : array_like
        Point(s) in [0, 1]^8. The first four coordinates are the segment
        lengths, the last four are the joint angles as fractions of a turn.

    Returns
    -------
    ndarray
        ``(sum_i L_i cos(t_i), sum_i L_i sin(t_i))`` where ``t_i`` is the
        cumulative angle of the first i joints
    """
    arr, single = _batch(u, 8)
    lengths = arr[:, :4]
    cumulative = np.cumsum(2 * np.pi * arr[:, 4:], axis=1)
    out = np.column_stack(
        [(lengths * np.cos(cumulative)).sum(axis=1), (lengths * np.sin(cumulative)).sum(axis=1)]
    )
    return _unbatch(out, single)


@dataclass(frozen=True)
class Problem:
    """
    A named analytic test problem

    Attributes
    ----------
    name : str
        Registry name
    p : int
        Input dimension
    q : int
        Output dimension
    func : callable
        Batched function of the inputs
    params : dict
        Keyword parameters passed to ``func``
    default_reference_size : int
        Size of the default reference set
    """

    name: str
    p: int
    q: int
    func: Callable[..., FloatArray]
    params: Dict[str, float] = field(default_factory=dict)
    default_reference_size: int = 100_000

    def __call__(self, x: ArrayLike) -> FloatArray:
        return self.func(x, **self.params)

    def evaluator(self) -> FunctionEvaluator:
        """In-process evaluator of the problem"""
        return FunctionEvaluator(self, self.p, self.q)

    def reference_outputs(
        self, size: Optional[int] = None, rng: Optional[SeededRng] = None
    ) -> FloatArray:
        """
        Dense stand-in for the output region

        Parameters
        ----------
        size : int, optional
            Approximate number of points. Defaults to
            ``default_reference_size``.
        rng : SeededRng, optional
            Stream for the Sobol scrambling and the disk targets. Defaults to
            a stream seeded with 0.

        Returns
        -------
        ndarray
            Images of a ``ceil(sqrt(size))``-per-side grid when p = 2, of
            ``size`` scrambled Sobol inputs otherwise. The robot arm uses
            ``size`` uniform targets in the disk of radius 4 instead.
        """
        size = self.default_reference_size if size is None else size
        if size < 1:
            raise UsageError(f"reference size must be positive, got {size}")
        rng = SeededRng(0) if rng is None else rng
        if self.name == "robot_arm":
            return uniform_ball(size, np.zeros(2), ROBOT_ARM_REACH, rng)
        if self.p == 2:
            side = math.ceil(math.sqrt(size))
            grid = np.linspace(0.0, 1.0, side)
            g1, g2 = np.meshgrid(grid, grid, indexing="ij")
            inputs = np.column_stack([g1.ravel(), g2.ravel()])
        else:
            inputs = scrambled_sobol(size, self.p, rng)
        return self(inputs)

    @property
    def spec(self) -> str:
        """Name and parameter string that rebuilds this problem"""
        if not self.params and self.name != "easom":
            return self.name
        if self.name == "easom":
            return f"easom:p={self.p}"
        return self.name + ":" + ",".join(f"{k}={float(v)!r}" for k, v in self.params.items())


def _float_param(params: Dict[str, str], key: str, default: float) -> float:
    value = params.pop(key, default)
    try:
        return float(value)
    except ValueError as err:
        raise UsageError(f"parameter {key} must be a number, got {value!r}") from err


def _make_inverse_radius(params: Dict[str, str]) -> Problem:
    eps = _float_param(params, "eps", 0.1)
    if not eps > 0:
        raise UsageError(f"eps must be positive, got {eps}")
    return Problem("inverse_radius", 2, 2, inverse_radius, {"eps": eps})


def _make_exponential(params: Dict[str, str]) -> Problem:
    alpha = _float_param(params, "alpha", 10.0)
    return Problem("exponential", 2, 3, exponential, {"alpha": alpha})


def _make_easom(params: Dict[str, str]) -> Problem:
    p = _float_param(params, "p", 2)
    if int(p) != p or p < 1:
        raise UsageError(f"easom needs a positive integer p, got {p:g}")
    return Problem("easom", int(p), 1, easom)


def _make_robot_arm(params: Dict[str, str]) -> Problem:
    return Problem(
        "robot_arm", 8, 2, robot_arm, default_reference_size=ROBOT_ARM_TARGETS
    )


PROBLEMS: Dict[str, Callable[[Dict[str, str]], Problem]] = {
    "inverse_radius": _make_inverse_radius,
    "exponential": _make_exponential,
    "easom": _make_easom,
    "robot_arm": _make_robot_arm,
}


def parse_problem(text: str) -> Tuple[str, Dict[str, str]]:
    """
    Split ``"name:key=value,key=value"`` into a name and raw parameters
    """
    name, _, rest = text.strip().partition(":")
    params: Dict[str, str] = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"malformed problem parameter {item!r} in {text!r}")
        params[key.strip()] = value.strip()
    return name.strip(), params


def get_problem(text: str, **overrides: Any) -> Problem:
    """
    Problem look-up with user-friendly errors

    Parameters
    ----------
    text : str
        Name with an optional parameter string, e.g. ``"exponential:alpha=100"``
    **overrides
        Parameters taking precedence over the parameter string

    Returns
    -------
    Problem
        The configured problem
    """
    name, params = parse_problem(text)
    params.update({k: str(v) for k, v in overrides.items()})
    if name not in PROBLEMS:
        raise UsageError(f"{name!r} is not a known problem; choose from {sorted(PROBLEMS)}")
    problem = PROBLEMS[name](params)
    if params:
        raise UsageError(f"unknown parameters for {name}: {sorted(params)}")
    return problem
